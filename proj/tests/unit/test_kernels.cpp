#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <vector>

#include "slowenv/kernels.hpp"
#include "slowenv/rng.hpp"

using namespace slowenv;

namespace {

std::int64_t ulp_distance(double a, double b) {
    if (a == b) return 0;
    std::int64_t ia, ib;
    std::memcpy(&ia, &a, 8);
    std::memcpy(&ib, &b, 8);
    if (ia < 0) ia = INT64_MIN - ia;
    if (ib < 0) ib = INT64_MIN - ib;
    return std::llabs(ia - ib);
}

std::vector<double> random_vec(std::size_t n, double lo, double hi, std::uint64_t stream) {
    rng::Key key{12345, stream};
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * key.uniform(0, i);
    return v;
}

std::vector<const kernels::Ops*> available_backends() {
    std::vector<const kernels::Ops*> out;
    for (const char* name : {"avx2", "neon"})
        if (const kernels::Ops* ops = kernels::ops_by_name(name)) out.push_back(ops);
    return out;
}

}  // namespace

TEST_CASE("kernels: scalar reference sanity") {
    const auto& sc = kernels::scalar_ops();
    std::vector<double> a = {1.0, 2.0, 3.0, 4.0, 5.0};
    CHECK(sc.sum(a.data(), a.size()) == doctest::Approx(15.0));
    std::vector<double> b = {2.0, 2.0, 2.0, 2.0, 2.0};
    CHECK(sc.dot(a.data(), b.data(), a.size()) == doctest::Approx(30.0));
    double lo, hi;
    sc.minmax(a.data(), a.size(), &lo, &hi);
    CHECK(lo == 1.0);
    CHECK(hi == 5.0);
    sc.minmax_diff(a.data(), b.data(), a.size(), &lo, &hi);
    CHECK(lo == -1.0);
    CHECK(hi == 3.0);
    std::vector<double> c = a;
    CHECK(sc.clamp_floor(c.data(), 2.5, c.size()) == 2);
    CHECK(c[0] == 2.5);
    CHECK(c[4] == 5.0);
}

TEST_CASE("kernels: SIMD lanes match the scalar reference") {
    const auto& sc = kernels::scalar_ops();
    for (const kernels::Ops* simd : available_backends()) {
        CAPTURE(simd->name);
        // deliberately awkward lengths to exercise tails
        for (std::size_t n : {1u, 2u, 3u, 5u, 8u, 17u, 64u, 255u, 256u, 1001u}) {
            auto a = random_vec(n, -3.0, 3.0, n);
            auto b = random_vec(n, 0.5, 4.0, 1000 + n);

            CHECK(std::abs(simd->sum(a.data(), n) - sc.sum(a.data(), n)) <=
                  1e-13 * (1.0 + std::abs(sc.sum(a.data(), n))) * n);
            CHECK(std::abs(simd->dot(a.data(), b.data(), n) - sc.dot(a.data(), b.data(), n)) <=
                  1e-13 * n);

            auto y1 = a, y2 = a;
            sc.mul(y1.data(), b.data(), n);
            simd->mul(y2.data(), b.data(), n);
            CHECK(y1 == y2);

            y1 = a;
            y2 = a;
            sc.scale(y1.data(), 1.7, n);
            simd->scale(y2.data(), 1.7, n);
            CHECK(y1 == y2);

            // fused multiply-add rounds once, scalar mul+add twice: the gap
            // is bounded by one ulp of the product term
            y1 = a;
            y2 = a;
            sc.axpy(y1.data(), -0.6, b.data(), n);
            simd->axpy(y2.data(), -0.6, b.data(), n);
            for (std::size_t i = 0; i < n; ++i)
                CHECK(std::abs(y1[i] - y2[i]) <= 1e-15 * (std::abs(a[i]) + std::abs(b[i])));

            std::vector<double> e1(n), e2(n);
            sc.exp_fill(e1.data(), a.data(), 0.37, n);
            simd->exp_fill(e2.data(), a.data(), 0.37, n);
            for (std::size_t i = 0; i < n; ++i) CHECK(ulp_distance(e1[i], e2[i]) <= 8);

            std::vector<double> l1(n), l2(n);
            sc.log_fill(l1.data(), b.data(), n);
            simd->log_fill(l2.data(), b.data(), n);
            for (std::size_t i = 0; i < n; ++i) CHECK(ulp_distance(l1[i], l2[i]) <= 8);

            double lo1, hi1, lo2, hi2;
            sc.minmax(a.data(), n, &lo1, &hi1);
            simd->minmax(a.data(), n, &lo2, &hi2);
            CHECK(lo1 == lo2);
            CHECK(hi1 == hi2);
            sc.minmax_diff(a.data(), b.data(), n, &lo1, &hi1);
            simd->minmax_diff(a.data(), b.data(), n, &lo2, &hi2);
            CHECK(lo1 == lo2);
            CHECK(hi1 == hi2);

            auto c1 = a, c2 = a;
            std::size_t k1 = sc.clamp_floor(c1.data(), 0.25, n);
            std::size_t k2 = simd->clamp_floor(c2.data(), 0.25, n);
            CHECK(k1 == k2);
            CHECK(c1 == c2);

            if (n % 2 == 0) {
                auto z1 = a, z2 = a;
                auto f = random_vec(n / 2, -2.0, 2.0, 777 + n);
                sc.cmul_factors(z1.data(), f.data(), n / 2);
                simd->cmul_factors(z2.data(), f.data(), n / 2);
                CHECK(z1 == z2);
            }
        }
    }
}

TEST_CASE("kernels: vector exp accuracy over wide range") {
    for (const kernels::Ops* simd : available_backends()) {
        CAPTURE(simd->name);
        // spans the whole useful argument range, including near over/underflow
        std::vector<double> xs;
        for (double x = -700.0; x <= 700.0; x += 13.37) xs.push_back(x);
        for (double x = -1.0; x <= 1.0; x += 0.0173) xs.push_back(x);
        xs.push_back(0.0);
        xs.push_back(709.0);
        xs.push_back(-745.0);
        std::vector<double> out(xs.size());
        simd->exp_fill(out.data(), xs.data(), 1.0, xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double ref = std::exp(xs[i]);
            CAPTURE(xs[i]);
            CHECK(ulp_distance(out[i], ref) <= 8);
        }
    }
}

TEST_CASE("kernels: vector log accuracy over decades") {
    for (const kernels::Ops* simd : available_backends()) {
        CAPTURE(simd->name);
        std::vector<double> xs;
        for (int d = -300; d <= 300; d += 7) xs.push_back(std::pow(10.0, d) * 1.2345);
        for (double x = 0.1; x <= 10.0; x += 0.0537) xs.push_back(x);
        xs.push_back(1.0);
        std::vector<double> out(xs.size());
        simd->log_fill(out.data(), xs.data(), xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double ref = std::log(xs[i]);
            CAPTURE(xs[i]);
            CHECK(ulp_distance(out[i], ref) <= 8);
        }
    }
}

TEST_CASE("kernels: active backend is well-formed") {
    const auto& ops = kernels::active();
    CHECK(ops.name != nullptr);
    std::vector<double> a = {1.0, 1.0, 1.0, 1.0};
    CHECK(ops.sum(a.data(), 4) == doctest::Approx(4.0));
}
