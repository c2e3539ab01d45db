#include "arpu/distributions.hpp"

#include <cmath>

#include "arpu/errors.hpp"

namespace arpu {

namespace {

std::vector<double> gaussian_vector(int d, Rng& rng) {
    std::vector<double> v(d);
    for (int i = 0; i < d; ++i) v[i] = rng.next_gaussian();
    return v;
}

std::vector<double> uniform_ball_vector(int d, double radius, Rng& rng) {
    std::vector<double> v = gaussian_vector(d, rng);
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) norm = 1.0;
    double r = radius * std::pow(rng.next_double(), 1.0 / d);
    for (double& x : v) x *= r / norm;
    return v;
}

double ball_cross_section_ratio(int d) {
    // 2 * V_{d-1} / V_d for unit balls: the maximal slab density.
    // V_d = pi^{d/2} / Gamma(d/2 + 1).
    auto log_vol = [](int n) {
        return 0.5 * n * std::log(M_PI) - std::lgamma(0.5 * n + 1.0);
    };
    return 2.0 * std::exp(log_vol(d - 1) - log_vol(d));
}

}  // namespace

double DistributionSpec::anti_concentration_c2() const {
    switch (family) {
        case Family::gaussian_isotropic:
            return 2.0 / std::sqrt(2.0 * M_PI);
        case Family::uniform_ball:
        case Family::annulus_with_margin:
            return ball_cross_section_ratio(dimension) / radius;
        case Family::uniform_cube:
            // Slab of width 2a cut from [-r, r]^d: density along any unit
            // direction is at most sqrt(d) / (2 r).
            return std::sqrt(static_cast<double>(dimension)) / radius;
        case Family::hypercube_balls:
        case Family::circle_s1:
            return 0.0;  // demo families; not anti-concentrated
    }
    return 0.0;
}

double DistributionSpec::concentration_c1() const {
    switch (family) {
        case Family::gaussian_isotropic:
            return 1.0;
        case Family::uniform_ball:
        case Family::annulus_with_margin:
        case Family::uniform_cube:
            return radius;
        case Family::hypercube_balls:
        case Family::circle_s1:
            return std::sqrt(static_cast<double>(dimension));
    }
    return 1.0;
}

DistributionSpec::Family distribution_family_from_string(const std::string& name) {
    if (name == "uniform_ball") return DistributionSpec::Family::uniform_ball;
    if (name == "uniform_cube") return DistributionSpec::Family::uniform_cube;
    if (name == "gaussian_isotropic") return DistributionSpec::Family::gaussian_isotropic;
    if (name == "annulus_with_margin") return DistributionSpec::Family::annulus_with_margin;
    if (name == "hypercube_balls") return DistributionSpec::Family::hypercube_balls;
    if (name == "circle_s1") return DistributionSpec::Family::circle_s1;
    throw config_error("unknown distribution family: " + name);
}

std::string to_string(DistributionSpec::Family family) {
    switch (family) {
        case DistributionSpec::Family::uniform_ball: return "uniform_ball";
        case DistributionSpec::Family::uniform_cube: return "uniform_cube";
        case DistributionSpec::Family::gaussian_isotropic: return "gaussian_isotropic";
        case DistributionSpec::Family::annulus_with_margin: return "annulus_with_margin";
        case DistributionSpec::Family::hypercube_balls: return "hypercube_balls";
        case DistributionSpec::Family::circle_s1: return "circle_s1";
    }
    return "?";
}

Hypothesis plant_hypothesis(const DistributionSpec& spec, Rng& rng) {
    Hypothesis h;
    h.weights = gaussian_vector(spec.dimension, rng);
    double norm = h.norm2();
    while (norm < 1e-12) {
        h.weights = gaussian_vector(spec.dimension, rng);
        norm = h.norm2();
    }
    for (double& w : h.weights) w /= norm;
    h.offset = spec.homogeneous
                   ? 0.0
                   : (2.0 * rng.next_double() - 1.0) * spec.offset_band;
    if (spec.family == DistributionSpec::Family::circle_s1) {
        // Tangent separator: negative only in an arbitrarily small arc.
        h.offset = -spec.radius * (1.0 - 1e-9);
    }
    return h;
}

Point sample_one(const DistributionSpec& spec, const Hypothesis* h_star, Rng& rng,
                 PointFactory& factory) {
    const int d = spec.dimension;
    switch (spec.family) {
        case DistributionSpec::Family::uniform_ball:
            return factory.make(uniform_ball_vector(d, spec.radius, rng));
        case DistributionSpec::Family::uniform_cube: {
            std::vector<double> v(d);
            for (int i = 0; i < d; ++i)
                v[i] = (2.0 * rng.next_double() - 1.0) * spec.radius;
            return factory.make(std::move(v));
        }
        case DistributionSpec::Family::gaussian_isotropic:
            return factory.make(gaussian_vector(d, rng));
        case DistributionSpec::Family::annulus_with_margin: {
            if (!h_star)
                throw config_error("annulus_with_margin requires the planted hypothesis");
            for (int tries = 0; tries < 100000; ++tries) {
                Point p = factory.make(uniform_ball_vector(d, spec.radius, rng));
                if (std::abs(evaluate(*h_star, p)) / h_star->norm2() >= spec.gamma)
                    return p;
            }
            throw config_error("annulus_with_margin: margin " + std::to_string(spec.gamma) +
                               " rejects almost all of the ball");
        }
        case DistributionSpec::Family::hypercube_balls: {
            std::vector<double> v(d);
            for (int i = 0; i < d; ++i) v[i] = rng.next_below(2) ? 1.0 : 0.0;
            std::vector<double> ball = uniform_ball_vector(d, spec.radius, rng);
            for (int i = 0; i < d; ++i) v[i] += ball[i];
            return factory.make(std::move(v));
        }
        case DistributionSpec::Family::circle_s1: {
            double theta = rng.next_double() * 2.0 * M_PI;
            return factory.make({spec.radius * std::cos(theta), spec.radius * std::sin(theta)});
        }
    }
    throw config_error("sample_one: unhandled family");
}

std::vector<Point> sample(const DistributionSpec& spec, const Hypothesis* h_star,
                          Rng& rng, PointFactory& factory, long count) {
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) out.push_back(sample_one(spec, h_star, rng, factory));
    return out;
}

}  // namespace arpu
