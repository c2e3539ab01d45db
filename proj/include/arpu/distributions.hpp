#pragma once

#include <string>
#include <vector>

#include "arpu/core.hpp"
#include "arpu/rng.hpp"

namespace arpu {

// Synthetic instance families. All families are continuous; the
// anti-concentration constant c2 (Pr[|<x,v> + b| <= a] <= c2 a for unit v)
// is documented per family and consumed by the margin-free learner mode.
struct DistributionSpec {
    enum class Family {
        uniform_ball,
        uniform_cube,
        gaussian_isotropic,
        annulus_with_margin,
        hypercube_balls,  // label-only hardness demo
        circle_s1,        // label-only hardness demo
    };

    Family family = Family::uniform_ball;
    int dimension = 2;
    double radius = 1.0;       // ball radius / cube half-width / corner-ball radius
    double gamma = 0.0;        // annulus: required margin from the planted separator
    double offset_band = 0.3;  // planted hypothesis offset drawn in [-band, band]
    bool homogeneous = false;  // force offset 0

    // Documented (c1, c2) anti-concentration constants for this family.
    double anti_concentration_c2() const;
    double concentration_c1() const;
};

DistributionSpec::Family distribution_family_from_string(const std::string& name);
std::string to_string(DistributionSpec::Family family);

// Planted separator with unit normal, so raw value equals euclidean margin.
Hypothesis plant_hypothesis(const DistributionSpec& spec, Rng& rng);

// i.i.d. points with fresh ids. The annulus family needs the planted
// hypothesis to honor its margin; other families ignore h_star.
std::vector<Point> sample(const DistributionSpec& spec, const Hypothesis* h_star,
                          Rng& rng, PointFactory& factory, long count);

Point sample_one(const DistributionSpec& spec, const Hypothesis* h_star, Rng& rng,
                 PointFactory& factory);

}  // namespace arpu
