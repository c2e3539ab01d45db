#include <doctest.h>

#include <cmath>

#include "arpu/distributions.hpp"

using namespace arpu;

TEST_CASE("gaussian isotropic moments") {
    DistributionSpec spec;
    spec.family = DistributionSpec::Family::gaussian_isotropic;
    spec.dimension = 2;
    Rng rng(1);
    PointFactory factory;
    std::vector<Point> pts = sample(spec, nullptr, rng, factory, 100000);
    for (int j = 0; j < 2; ++j) {
        double mean = 0.0, var = 0.0;
        for (const Point& p : pts) mean += p.coords[j];
        mean /= pts.size();
        for (const Point& p : pts) var += (p.coords[j] - mean) * (p.coords[j] - mean);
        var /= pts.size();
        CHECK(std::abs(mean) < 0.02);
        CHECK(std::abs(var - 1.0) < 0.03);
    }
}

TEST_CASE("uniform ball norms and volume ratio") {
    DistributionSpec spec;
    spec.family = DistributionSpec::Family::uniform_ball;
    spec.dimension = 3;
    Rng rng(2);
    PointFactory factory;
    long inner = 0;
    const long n = 100000;
    for (long i = 0; i < n; ++i) {
        Point p = sample_one(spec, nullptr, rng, factory);
        double norm = 0.0;
        for (double c : p.coords) norm += c * c;
        norm = std::sqrt(norm);
        REQUIRE(norm <= 1.0 + 1e-12);
        if (norm <= 0.5) ++inner;
    }
    // Fraction inside half the radius is (1/2)^d.
    CHECK(static_cast<double>(inner) / n == doctest::Approx(0.125).epsilon(0.08));
}

TEST_CASE("annulus respects the planted margin") {
    DistributionSpec spec;
    spec.family = DistributionSpec::Family::annulus_with_margin;
    spec.dimension = 2;
    spec.gamma = 0.15;
    Rng rng(3);
    PointFactory factory;
    Hypothesis h = plant_hypothesis(spec, rng);
    double min_margin = 1e9;
    for (int i = 0; i < 100000; ++i) {
        Point p = sample_one(spec, &h, rng, factory);
        min_margin = std::min(min_margin, std::abs(evaluate(h, p)) / h.norm2());
    }
    CHECK(min_margin >= spec.gamma);
}

TEST_CASE("planted hypotheses have unit normals; homogeneous mode zeroes b") {
    DistributionSpec spec;
    spec.family = DistributionSpec::Family::uniform_ball;
    spec.dimension = 4;
    Rng rng(4);
    Hypothesis h = plant_hypothesis(spec, rng);
    CHECK(h.norm2() == doctest::Approx(1.0));
    CHECK(std::abs(h.offset) <= spec.offset_band);

    spec.homogeneous = true;
    Hypothesis hom = plant_hypothesis(spec, rng);
    CHECK(hom.offset == 0.0);
}

TEST_CASE("sampling is deterministic under a fixed seed") {
    DistributionSpec spec;
    spec.family = DistributionSpec::Family::uniform_cube;
    spec.dimension = 3;
    Rng a(99), b(99);
    PointFactory fa, fb;
    std::vector<Point> pa = sample(spec, nullptr, a, fa, 50);
    std::vector<Point> pb = sample(spec, nullptr, b, fb, 50);
    for (int i = 0; i < 50; ++i) CHECK(pa[i].coords == pb[i].coords);
}

TEST_CASE("fresh ids across a sample") {
    DistributionSpec spec;
    spec.family = DistributionSpec::Family::uniform_ball;
    spec.dimension = 2;
    Rng rng(5);
    PointFactory factory;
    std::vector<Point> pts = sample(spec, nullptr, rng, factory, 100);
    for (int i = 1; i < 100; ++i) CHECK(pts[i].id > pts[i - 1].id);
}

TEST_CASE("anti-concentration holds at the documented constant") {
    // Measured Pr[|<x, v> + b| <= a] <= c2 a + slack over a grid of probes.
    for (auto family : {DistributionSpec::Family::gaussian_isotropic,
                        DistributionSpec::Family::uniform_ball}) {
        DistributionSpec spec;
        spec.family = family;
        spec.dimension = 2;
        double c2 = spec.anti_concentration_c2();
        REQUIRE(c2 > 0.0);
        Rng rng(6);
        PointFactory factory;
        std::vector<Point> pts = sample(spec, nullptr, rng, factory, 40000);
        Rng probe_rng(7);
        for (int probe = 0; probe < 8; ++probe) {
            double angle = probe_rng.next_double() * 6.283185307179586;
            double vx = std::cos(angle), vy = std::sin(angle);
            double b = (2.0 * probe_rng.next_double() - 1.0) * 0.4;
            for (double alpha : {0.05, 0.1, 0.2}) {
                long hits = 0;
                for (const Point& p : pts)
                    if (std::abs(vx * p.coords[0] + vy * p.coords[1] + b) <= alpha)
                        ++hits;
                double rate = static_cast<double>(hits) / pts.size();
                CHECK(rate <= c2 * alpha + 0.02);
            }
        }
    }
}

TEST_CASE("demo families exist and stay on their supports") {
    DistributionSpec corners;
    corners.family = DistributionSpec::Family::hypercube_balls;
    corners.dimension = 3;
    corners.radius = 1.0 / (4.0 * std::sqrt(3.0));
    Rng rng(8);
    PointFactory factory;
    for (int i = 0; i < 200; ++i) {
        Point p = sample_one(corners, nullptr, rng, factory);
        // Within the corner-ball radius of some hypercube vertex.
        double best = 1e9;
        for (int mask = 0; mask < 8; ++mask) {
            double d2 = 0.0;
            for (int j = 0; j < 3; ++j) {
                double corner = (mask >> j) & 1 ? 1.0 : 0.0;
                d2 += (p.coords[j] - corner) * (p.coords[j] - corner);
            }
            best = std::min(best, std::sqrt(d2));
        }
        CHECK(best <= corners.radius + 1e-9);
    }

    DistributionSpec circle;
    circle.family = DistributionSpec::Family::circle_s1;
    circle.dimension = 2;
    for (int i = 0; i < 200; ++i) {
        Point p = sample_one(circle, nullptr, rng, factory);
        CHECK(std::hypot(p.coords[0], p.coords[1]) == doctest::Approx(1.0));
    }
}
