#include "doctest.h"

#include <cmath>
#include <complex>

#include "slowenv/rng.hpp"
#include "slowenv/torus_grid.hpp"

using namespace slowenv;

namespace {
const double kPi = 3.14159265358979323846;

Field random_field(const TorusGrid& g, std::uint64_t stream, double lo = -1.0, double hi = 1.0) {
    rng::Key key{42, stream};
    Field f(g);
    for (int j = 0; j < g.n(); ++j)
        f[static_cast<std::size_t>(j)] = lo + (hi - lo) * key.uniform(0, static_cast<std::uint64_t>(j));
    return f;
}

double max_abs_diff(const Field& a, const Field& b) {
    double m = 0.0;
    for (int j = 0; j < a.n(); ++j)
        m = std::max(m, std::abs(a[static_cast<std::size_t>(j)] - b[static_cast<std::size_t>(j)]));
    return m;
}
}  // namespace

TEST_CASE("make_grid basics") {
    TorusGrid g = make_grid(8);
    CHECK(g.n() == 8);
    CHECK(g.dx() == 0.125);
    CHECK(g.node(0) == 0.0);
    CHECK(g.node(1) == 0.125);
    CHECK(g.node(7) == 0.875);

    TorusGrid g2 = make_grid(2);
    CHECK(g2.dx() == 0.5);
    CHECK(g2.node(1) == 0.5);

    CHECK_THROWS_AS(make_grid(1), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(0), std::invalid_argument);
}

TEST_CASE("integrate: rectangle rule") {
    TorusGrid g = make_grid(64);
    Field one(g, 1.0);
    CHECK(integrate(one) == doctest::Approx(1.0).epsilon(1e-15));

    Field c = Field::from_function(g, [](double x) { return std::cos(2.0 * kPi * x); });
    CHECK(std::abs(integrate(c)) < 1e-14);

    TorusGrid g16 = make_grid(16);
    Field two(g16, 2.0);
    CHECK(integrate(two) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("spectral transform: known modes and roundtrip") {
    TorusGrid g = make_grid(32);

    Field one(g, 1.0);
    SpectralCoeffs c = spectral_forward(one);
    CHECK(std::abs(c.at_freq(0) - 1.0) < 1e-14);
    for (int k = c.min_freq(); k <= c.max_freq(); ++k)
        if (k != 0) CHECK(std::abs(c.at_freq(k)) < 1e-14);

    Field cosf = Field::from_function(g, [](double x) { return std::cos(2.0 * kPi * x); });
    c = spectral_forward(cosf);
    CHECK(std::abs(c.at_freq(1) - 0.5) < 1e-14);
    CHECK(std::abs(c.at_freq(-1) - 0.5) < 1e-14);
    CHECK(std::abs(c.at_freq(0)) < 1e-14);
    CHECK(std::abs(c.at_freq(5)) < 1e-14);

    // conjugate symmetry for a real field
    Field rf = random_field(g, 7);
    c = spectral_forward(rf);
    for (int k = 1; k < g.n() / 2; ++k) {
        std::complex<double> a = c.at_freq(k);
        std::complex<double> b = std::conj(c.at_freq(-k));
        CHECK(std::abs(a - b) < 1e-14);
    }

    Field back = spectral_inverse(c);
    CHECK(max_abs_diff(rf, back) < 1e-12);

    SpectralCoeffs wrong;
    wrong.grid = &g;
    wrong.coeffs.resize(static_cast<std::size_t>(g.n() / 2));
    CHECK_THROWS_AS(spectral_inverse(wrong), std::invalid_argument);
}

TEST_CASE("spectral transform: non power-of-two sizes") {
    for (int n : {6, 12, 48, 100}) {
        TorusGrid g = make_grid(n);
        Field cosf = Field::from_function(g, [](double x) { return std::cos(2.0 * kPi * x); });
        SpectralCoeffs c = spectral_forward(cosf);
        CHECK(std::abs(c.at_freq(1) - 0.5) < 1e-13);
        Field rf = random_field(g, static_cast<std::uint64_t>(n));
        Field back = spectral_inverse(spectral_forward(rf));
        CHECK(max_abs_diff(rf, back) < 1e-12);
    }
}

TEST_CASE("heat_apply: identity, constants, eigenfunction") {
    TorusGrid g = make_grid(256);

    Field rf = random_field(g, 3);
    Field same = heat_apply(rf, 0.0, 1.0);
    CHECK(max_abs_diff(rf, same) == 0.0);

    Field c(g, 3.25);
    Field hc = heat_apply(c, 0.7, 2.0);
    CHECK(max_abs_diff(c, hc) < 1e-14);

    // cos(2 pi x) is an eigenfunction with decay exp(-t kappa 4 pi^2)
    Field cosf = Field::from_function(g, [](double x) { return std::cos(2.0 * kPi * x); });
    Field h = heat_apply(cosf, 0.1, 1.0);
    double decay = std::exp(-0.1 * 4.0 * kPi * kPi);
    for (int j = 0; j < g.n(); ++j) {
        CHECK(h[static_cast<std::size_t>(j)] ==
              doctest::Approx(decay * cosf[static_cast<std::size_t>(j)]).epsilon(1e-12));
    }

    CHECK_THROWS_AS(heat_apply(rf, -0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(heat_apply(rf, 0.1, 0.0), std::invalid_argument);
}

TEST_CASE("heat_apply: mass conservation and semigroup property") {
    TorusGrid g = make_grid(128);
    Field rf = random_field(g, 11, 0.2, 2.0);
    double m0 = integrate(rf);

    for (double t : {1e-4, 0.01, 0.3, 2.0}) {
        for (double kappa : {0.25, 1.0, 4.0}) {
            Field h = heat_apply(rf, t, kappa);
            CHECK(integrate(h) == doctest::Approx(m0).epsilon(1e-13));
        }
    }

    Field a = heat_apply(heat_apply(rf, 0.05, 1.0), 0.125, 1.0);
    Field b = heat_apply(rf, 0.175, 1.0);
    CHECK(max_abs_diff(a, b) < 1e-11);
}

TEST_CASE("Parseval identity") {
    TorusGrid g = make_grid(96);
    Field rf = random_field(g, 13);
    double real_side = inner(rf, rf);
    SpectralCoeffs c = spectral_forward(rf);
    double spec_side = 0.0;
    for (const auto& z : c.coeffs) spec_side += std::norm(z);
    CHECK(real_side == doctest::Approx(spec_side).epsilon(1e-11));
}

TEST_CASE("heat_apply keeps positive moderate-bandwidth fields nonnegative") {
    TorusGrid g = make_grid(256);
    Field f = Field::from_function(g, [](double x) {
        return 0.05 + std::exp(std::cos(2.0 * kPi * x) + 0.5 * std::sin(4.0 * kPi * x));
    });
    double fmax = 0.0;
    for (int j = 0; j < g.n(); ++j) fmax = std::max(fmax, f[static_cast<std::size_t>(j)]);
    for (double t : {1e-5, 1e-3, 0.1, 1.0}) {
        Field h = heat_apply(f, t, 1.0);
        for (int j = 0; j < g.n(); ++j)
            CHECK(h[static_cast<std::size_t>(j)] >= -1e-12 * fmax);
    }
}
