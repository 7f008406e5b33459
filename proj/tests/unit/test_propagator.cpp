#include "doctest.h"

#include <cmath>

#include "slowenv/projective.hpp"
#include "slowenv/propagator.hpp"

using namespace slowenv;

namespace {
const double kPi = 3.14159265358979323846;

PotentialSample cos_sample(const TorusGrid& g, double amplitude = 1.0) {
    PotentialSample p;
    p.kind = NoiseKind::HolderFourier;
    p.field = Field::from_function(
        g, [amplitude](double x) { return amplitude * std::cos(2.0 * kPi * x); });
    return p;
}

PotentialSample const_sample(const TorusGrid& g, double c) {
    PotentialSample p;
    p.kind = NoiseKind::ConstantInSpace;
    p.field = Field(g, c);
    return p;
}
}  // namespace

TEST_CASE("propagate_period: zero potential leaves the uniform density invariant") {
    TorusGrid g = make_grid(64);
    ProjectiveDensity one = uniform_density(g);
    PotentialSample zero = const_sample(g, 0.0);

    for (Scheme s : {Scheme::StrangSplit, Scheme::CrankNicolson}) {
        SchemeConfig cfg;
        cfg.scheme = s;
        for (double tau : {0.01, 0.5, 2.0}) {
            PeriodResult r = propagate_period(one, zero, tau, cfg);
            CHECK(std::abs(r.log_mass) < 1e-12);
            for (int j = 0; j < g.n(); ++j)
                CHECK(r.z_next.field[static_cast<std::size_t>(j)] == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    SchemeConfig eig;
    eig.scheme = Scheme::EigenExact;
    PeriodResult r = propagate_period(one, zero, 1.0, eig);
    CHECK(std::abs(r.log_mass) < 5e-11);  // eigenvalue rounding at norm ~4 kappa n^2
}

TEST_CASE("propagate_period: constant potential adds tau*c to the log-mass") {
    TorusGrid g = make_grid(64);
    ProjectiveDensity bump = cosine_bump_density(g);
    PotentialSample c = const_sample(g, 0.8);

    // exact for the splitting and the eigensolve; Crank-Nicolson carries its
    // O(dt^2) stepping error even here. The EigenExact profile differs from
    // the spectral heat flow by the documented matrix-symbol mismatch.
    struct Tol {
        Scheme s;
        double mass;
        double dh;
    };
    for (Tol t : {Tol{Scheme::StrangSplit, 1e-12, 1e-9}, Tol{Scheme::EigenExact, 5e-11, 1e-6},
                  Tol{Scheme::CrankNicolson, 5e-8, 1e-5}}) {
        SchemeConfig cfg;
        cfg.scheme = t.s;
        double tau = 0.37;
        PeriodResult r = propagate_period(bump, c, tau, cfg);
        CHECK(std::abs(r.log_mass - tau * 0.8) < t.mass);

        // z_next must be the heat-flowed profile: constants commute
        Field flowed = heat_apply(bump.field, tau, cfg.kappa);
        ProjectiveDensity zh = normalize(flowed).z;
        CHECK(hilbert_distance(r.z_next, zh) < t.dh);
    }
}

TEST_CASE("scheme cross-validation on the cosine potential (EigenExact oracle)") {
    TorusGrid g = make_grid(256);
    ProjectiveDensity one = uniform_density(g);
    PotentialSample xi = cos_sample(g);
    double tau = 0.1;

    SchemeConfig eig;
    eig.scheme = Scheme::EigenExact;
    double ref = propagate_period(one, xi, tau, eig).log_mass;

    SchemeConfig strang;
    strang.scheme = Scheme::StrangSplit;
    double lm[4];
    int i = 0;
    for (double dt : {1e-3, 5e-4, 2.5e-4, 1.25e-4}) {
        strang.dt_max = dt;
        lm[i++] = propagate_period(one, xi, tau, strang).log_mass;
    }
    CHECK(std::abs(lm[0] - ref) <= 1e-6);

    // dt^2 law against the Richardson-converged splitting value; at n=256 the
    // raw gap to EigenExact still carries the ~3e-8 spatial-symbol offset
    // (the acceptance suite checks the eigen-referenced ratio at n=1024)
    double conv = lm[3] + (lm[3] - lm[2]) / 3.0;
    double ratio = std::abs(lm[0] - conv) / std::abs(lm[1] - conv);
    CHECK(ratio >= 3.7);
    CHECK(ratio <= 4.3);

    SchemeConfig cn;
    cn.scheme = Scheme::CrankNicolson;
    cn.dt_max = 1e-4;
    double lm_cn = propagate_period(one, xi, tau, cn).log_mass;
    CHECK(std::abs(lm_cn - ref) <= 1e-5);
}

TEST_CASE("projective invariance: scaling the input only shifts the log-mass") {
    TorusGrid g = make_grid(64);
    PotentialSample xi = cos_sample(g);
    SchemeConfig cfg;

    PeriodOperator op(xi, 0.25, cfg);
    AlignedVec u = cosine_bump_density(g).field.values;
    AlignedVec u3 = u;
    for (auto& v : u3) v *= 3.0;

    double lr1 = op.apply_raw({&u});
    double lr2 = op.apply_raw({&u3});
    CHECK(lr1 == lr2);
    double m1 = 0, m3 = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        m1 += u[j];
        m3 += u3[j];
    }
    CHECK(std::log(m3 / m1) == doctest::Approx(std::log(3.0)).epsilon(1e-13));
    for (std::size_t j = 0; j < u.size(); ++j)
        CHECK(u3[j] / u[j] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("semigroup within a period (EigenExact)") {
    TorusGrid g = make_grid(64);
    PotentialSample xi = cos_sample(g, 1.5);
    SchemeConfig cfg;
    cfg.scheme = Scheme::EigenExact;
    ProjectiveDensity z = cosine_bump_density(g);

    PeriodResult full = propagate_period(z, xi, 0.6, cfg);
    PeriodResult h1 = propagate_period(z, xi, 0.3, cfg);
    PeriodResult h2 = propagate_period(h1.z_next, xi, 0.3, cfg);
    CHECK(std::abs(full.log_mass - (h1.log_mass + h2.log_mass)) < 1e-8);
    CHECK(hilbert_distance(full.z_next, h2.z_next) < 1e-8);
}

TEST_CASE("positivity: strictly positive densities stay positive, no clamps") {
    TorusGrid g = make_grid(256);
    SchemeConfig cfg;
    rng::Key key{31, 7};
    std::uint64_t idx = 0;
    for (const NoiseSpec& spec :
         {NoiseSpec::piecewise(4, ScalarLaw::Rademacher, 1.0), NoiseSpec::holder_fourier(0.5, 16),
          NoiseSpec::white()}) {
        PotentialSample xi = sample_potential(spec, g, key, idx++);
        ProjectiveDensity z = random_density(g, key, 100 + idx);
        PeriodResult r = propagate_period(z, xi, 0.05, cfg);
        CHECK(r.clamp_events == 0);
        for (int j = 0; j < g.n(); ++j)
            CHECK(r.z_next.field[static_cast<std::size_t>(j)] > 0.0);
    }
}

TEST_CASE("evolve: telescoping identity and zero-noise control") {
    TorusGrid g = make_grid(64);
    SchemeConfig cfg;

    RenewalPotential zero(NoiseSpec::zero(), g, 0.1, {1, 1});
    EvolveResult r = evolve(uniform_density(g), zero, 100, cfg);
    CHECK(std::abs(r.total_log_mass) < 1e-10);
    double s = 0.0;
    for (double inc : r.increments) s += inc;
    CHECK(r.total_log_mass == doctest::Approx(s).epsilon(1e-12));

    // constants: increments are tau * c_i
    RenewalPotential cst(NoiseSpec::constant(ScalarLaw::CenteredGaussian, 1.0), g, 0.25, {2, 5});
    EvolveResult rc = evolve(uniform_density(g), cst, 50, cfg);
    double expect = 0.0;
    for (std::uint64_t i = 0; i < 50; ++i)
        expect += 0.25 * cst.sample(i).field[0];
    CHECK(rc.total_log_mass == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("evolve: initial conditions forget each other (piecewise noise)") {
    TorusGrid g = make_grid(64);
    SchemeConfig cfg;
    RenewalPotential r(NoiseSpec::piecewise(4, ScalarLaw::Rademacher, 1.0), g, 0.5, {3, 9});

    EvolveResult a = evolve(uniform_density(g), r, 60, cfg);
    EvolveResult b = evolve(cosine_bump_density(g), r, 60, cfg);
    CHECK(std::abs(a.total_log_mass - b.total_log_mass) < 3.0);
    // per-period increments synchronize
    CHECK(std::abs(a.increments.back() - b.increments.back()) < 1e-8);
    CHECK(hilbert_distance(a.z_final, b.z_final) < 1e-8);
}

TEST_CASE("feynman-kac: exact cases") {
    TorusGrid g = make_grid(64);
    ProjectiveDensity one = uniform_density(g);

    FeynmanKacResult r = feynman_kac_mass(const_sample(g, 0.0), 0.3, one, 500, 0.01, 1.0, {7, 7});
    CHECK(r.estimate == 1.0);
    CHECK(r.stderr_ == 0.0);

    r = feynman_kac_mass(const_sample(g, 1.3), 0.3, one, 500, 0.01, 1.0, {7, 8});
    CHECK(r.estimate == doctest::Approx(std::exp(0.3 * 1.3)).epsilon(1e-11));
    CHECK(r.stderr_ == 0.0);

    PotentialSample white = sample_potential(NoiseSpec::white(), g, {1, 2}, 0);
    CHECK_THROWS_AS(feynman_kac_mass(white, 0.3, one, 10, 0.01, 1.0, {7, 9}), Unsupported);
    CHECK_THROWS_AS(feynman_kac_mass(const_sample(g, 0.0), 0.3, one, 10, 0.5, 1.0, {7, 9}),
                    std::invalid_argument);
}

TEST_CASE("feynman-kac agrees with the EigenExact mass on the cosine potential") {
    TorusGrid g = make_grid(256);
    ProjectiveDensity one = uniform_density(g);
    PotentialSample xi = cos_sample(g);
    double tau = 0.2;

    SchemeConfig eig;
    eig.scheme = Scheme::EigenExact;
    double mass_ref = std::exp(propagate_period(one, xi, tau, eig).log_mass);

    FeynmanKacResult fk = feynman_kac_mass(xi, tau, one, 20000, 5e-4, 1.0, {123, 4});
    CHECK(std::abs(fk.estimate - mass_ref) <= 3.0 * fk.stderr_);
    CHECK(fk.stderr_ > 0.0);
    CHECK(fk.stderr_ < 0.01);
}

TEST_CASE("pair distance propagation matches direct computation at moderate distances") {
    TorusGrid g = make_grid(64);
    PotentialSample xi = cos_sample(g);
    SchemeConfig cfg;
    rng::Key key{55, 2};
    ProjectiveDensity a = random_density(g, key, 0);
    ProjectiveDensity b = random_density(g, key, 1);

    double tau = 0.02;  // mild contraction: both routes resolve the distance
    double via_pair = propagate_pair_distance(a, b, xi, tau, cfg);
    PeriodResult ra = propagate_period(a, xi, tau, cfg);
    PeriodResult rb = propagate_period(b, xi, tau, cfg);
    double direct = hilbert_distance(ra.z_next, rb.z_next);
    CHECK(via_pair == doctest::Approx(direct).epsilon(1e-9));
}

TEST_CASE("white-noise stiffness rule caps the splitting step") {
    CHECK(strang_substeps(1.0, 1e-3, 0.0) == 1000);
    CHECK(strang_substeps(0.001, 1e-3, 43.0) == 1);
    CHECK(strang_substeps(0.01, 1e-3, 500.0) == 50);  // cap 1/(10*500) = 2e-4
}
