#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/levelsets.hpp"
#include "core/shapes.hpp"
#include "core/validate.hpp"
#include "testsupport.hpp"

using namespace rivlab;
using namespace rivlab::test;

namespace {
const double L = 2.0 * M_PI;
}

// --- component parts ---------------------------------------------------------

TEST_CASE("component parts split signs pointwise") {
    const GridSpec g(8, L);
    VectorField3 f(g);
    for (auto& v : f[0].values) v = -2.0;
    for (auto& v : f[1].values) v = 1.0;
    const auto parts = component_parts(f);
    CHECK(parts[0].values[0] == 0.0);   // f1+
    CHECK(parts[1].values[0] == 2.0);   // f1-
    CHECK(parts[2].values[0] == 1.0);   // f2+
    CHECK(parts[3].values[0] == 0.0);   // f2-
    CHECK(parts[4].values[0] == 0.0);   // f3+
    CHECK(parts[5].values[0] == 0.0);   // f3-
}

TEST_CASE("component parts of zero field are all zero") {
    const GridSpec g(8, L);
    const auto parts = component_parts(VectorField3(g));
    for (const auto& p : parts)
        for (double v : p.values) CHECK(v == 0.0);
}

TEST_CASE("component parts reconstruct the field and are disjoint") {
    const GridSpec g(16, L);
    VectorField3 f(g);
    for (int c = 0; c < 3; ++c) f[c] = random_blob_field(g, 100 + uint64_t(c));
    const auto parts = component_parts(f);
    for (int c = 0; c < 3; ++c)
        for (size_t i = 0; i < f[c].values.size(); ++i) {
            const double plus = parts[size_t(2 * c)].values[i];
            const double minus = parts[size_t(2 * c + 1)].values[i];
            CHECK(plus - minus == f[c].values[i]);  // exact reconstruction
            CHECK(plus * minus == 0.0);             // pointwise disjoint
        }
}

TEST_CASE("union of the six component masks equals the magnitude mask") {
    const GridSpec g(16, L);
    VectorField3 f(g);
    for (int c = 0; c < 3; ++c) f[c] = random_blob_field(g, 55 + uint64_t(c));
    const double cut = 0.5 * max_norm(f);
    const auto parts = component_parts(f);
    BinaryMask u(g);
    for (int c = 0; c < 6; ++c) u = mask_union(u, superlevel_mask(parts[size_t(c)], cut));
    const auto mag = superlevel_mask(max_norm_field(f), cut);
    CHECK(u.bits == mag.bits);  // exact, for any field
}

// --- superlevel masks ------------------------------------------------------------

TEST_CASE("superlevel mask basics") {
    const GridSpec g(16, L);
    ScalarField3 ones(g, 1.0);
    CHECK(superlevel_mask(ones, 2.0).count_set() == 0);
    CHECK(superlevel_mask(ones, 0.5).count_set() == g.point_count());

    const auto sinx = sample_scalar(g, [](double x, double, double) { return std::sin(x); });
    const auto half = superlevel_mask(sinx, 0.0);
    const size_t n3 = g.point_count();
    const size_t slab = n3 / size_t(g.n);
    CHECK(std::llabs((long long)half.count_set() - (long long)(n3 / 2)) <= (long long)slab);
}

TEST_CASE("superlevel mask rejects negative cut") {
    const GridSpec g(8, L);
    CHECK_THROWS_AS(superlevel_mask(ScalarField3(g), -1.0), std::invalid_argument);
}

// --- connected components ----------------------------------------------------------

namespace {

BinaryMask boxes_mask(const GridSpec& g, bool straddle) {
    BinaryMask m(g);
    // box A: 4x4x4
    for (int z = 1; z <= 4; ++z)
        for (int y = 1; y <= 4; ++y)
            for (int x = 1; x <= 4; ++x) m.set(g.index(x, y, z));
    // box B: 3x3x3, optionally straddling the x-periodic boundary
    for (int z = 9; z <= 11; ++z)
        for (int y = 9; y <= 11; ++y)
            for (int x = 0; x < 3; ++x)
                m.set(g.wrap_index(straddle ? x + g.n - 2 : x + 8, y, z));
    return m;
}

}  // namespace

TEST_CASE("two disjoint boxes label as two components") {
    const GridSpec g(16, L);
    const auto rivs = connected_components(boxes_mask(g, false), 26);
    REQUIRE(rivs.size() == 2);
    CHECK(rivs[0].voxels.size() == 64);  // largest first
    CHECK(rivs[1].voxels.size() == 27);
    CHECK(rivs[0].component_id == 0);
    CHECK(rivs[1].component_id == 1);
}

TEST_CASE("component straddling the periodic boundary wraps its bbox") {
    const GridSpec g(16, L);
    const auto rivs = connected_components(boxes_mask(g, true), 26);
    REQUIRE(rivs.size() == 2);
    const Riv& b = rivs[1];
    CHECK(b.voxels.size() == 27);
    CHECK(b.bbox.anchor[0] == 14);  // starts before the seam
    CHECK(b.bbox.extent[0] == 3);   // ...and wraps across it
    CHECK(b.bbox.extent[1] == 3);
}

TEST_CASE("empty mask yields no components") {
    const GridSpec g(8, L);
    CHECK(connected_components(BinaryMask(g), 26).empty());
}

TEST_CASE("corner-touching voxels merge under 26 but not 6 connectivity") {
    const GridSpec g(8, L);
    BinaryMask m(g);
    m.set(g.index(2, 2, 2));
    m.set(g.index(3, 3, 3));
    CHECK(connected_components(m, 26).size() == 1);
    CHECK(connected_components(m, 6).size() == 2);
}

TEST_CASE("full mask is one component spanning the box") {
    const GridSpec g(8, L);
    BinaryMask m(g);
    for (auto& b : m.bits) b = 1;
    const auto rivs = connected_components(m, 6);
    REQUIRE(rivs.size() == 1);
    CHECK(rivs[0].voxels.size() == g.point_count());
    for (int a = 0; a < 3; ++a) CHECK(rivs[0].bbox.extent[size_t(a)] == g.n);
}

// --- sparseness ratio ------------------------------------------------------------------

TEST_CASE("sparseness ratio of full and empty masks") {
    const GridSpec g(32, L);
    BinaryMask full(g);
    for (auto& b : full.bits) b = 1;
    const std::array<double, 3> x0{1.0, 2.0, 3.0};
    CHECK(sparseness_ratio(full, x0, 1.0) == 1.0);
    CHECK(sparseness_ratio(BinaryMask(g), x0, 1.0) == 0.0);
}

TEST_CASE("sparseness ratio of a half-space through the center is exactly 1/2") {
    const GridSpec g(32, L);
    const auto m = halfspace_mask(g, 0, L / 2.0);
    const std::array<double, 3> x0{L / 2.0, 2.0, 4.0};
    for (double r : {0.5, 1.0, 2.5}) {
        CHECK(sparseness_ratio(m, x0, r) == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("sparseness ratio rejects out-of-range radii") {
    const GridSpec g(16, L);
    BinaryMask m(g);
    const std::array<double, 3> x0{0, 0, 0};
    CHECK_THROWS_AS(sparseness_ratio(m, x0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(sparseness_ratio(m, x0, L / 2.0), std::invalid_argument);
}

TEST_CASE("sparseness ratio matches the ball-in-ball closed form") {
    const GridSpec g(64, L);
    const std::array<double, 3> c{L / 2, L / 2, L / 2};
    const double rho = 0.7;
    const auto m = ball_mask(g, c, rho);
    for (double r : {0.8, 1.0, 1.4, 2.0}) {
        const double expected = std::pow(rho / r, 3.0);
        CHECK(sparseness_ratio(m, c, r) == doctest::Approx(expected).epsilon(0.02));
    }
    // ball larger than the query: ratio 1
    CHECK(sparseness_ratio(m, c, 0.35) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("sparseness ratio is monotone in the mask") {
    const GridSpec g(24, L);
    const auto field = random_blob_field(g, 2024);
    const auto small = superlevel_mask(field, 0.8);
    const auto big = superlevel_mask(field, 0.4);  // superset of `small`
    Rng rng(5);
    for (int t = 0; t < 12; ++t) {
        const std::array<double, 3> x0{rng.uniform(0, L), rng.uniform(0, L), rng.uniform(0, L)};
        const double r = rng.uniform(0.3, 2.8);
        CHECK(sparseness_ratio(small, x0, r) <= sparseness_ratio(big, x0, r) + 1e-15);
    }
}

TEST_CASE("sparseness ratio agrees with the Monte Carlo oracle within 1%") {
    const GridSpec g(48, L);
    const std::array<double, 3> c{3.0, 3.0, 3.0};
    const size_t mc_n = 200000;
    struct Case {
        BinaryMask mask;
        std::array<double, 3> x0;
        double r;
    };
    std::vector<Case> cases;
    cases.push_back({ball_mask(g, c, 0.8), c, 1.2});
    cases.push_back({ball_mask(g, c, 0.8), {c[0] + 0.5, c[1], c[2]}, 0.9});
    cases.push_back({halfspace_mask(g, 0, 3.0), c, 1.5});
    cases.push_back({slab_mask(g, 2, 2.5, 3.5), c, 2.0});
    uint64_t seed = 900;
    for (const auto& cs : cases) {
        const double vox = sparseness_ratio(cs.mask, cs.x0, cs.r);
        const double mc = mc_sparseness_oracle(cs.mask, cs.x0, cs.r, mc_n, seed++);
        CHECK(std::fabs(vox - mc) < 0.01);
    }
}

// --- z_alpha -----------------------------------------------------------------------------

namespace {

// Vector field whose first component is a cone peaking at `center`:
// the super-level set at lambda*max is the ball of radius controlled below.
VectorField3 single_ball_field(const GridSpec& g, const std::array<double, 3>& center,
                               double rho, double lambda, double peak) {
    VectorField3 f(g);
    const double h = g.spacing();
    const double slope = peak * (1.0 - lambda) / rho;
    for (int iz = 0; iz < g.n; ++iz)
        for (int iy = 0; iy < g.n; ++iy)
            for (int ix = 0; ix < g.n; ++ix) {
                const double d =
                    periodic_distance({ix * h, iy * h, iz * h}, center, g.domain_length);
                f[0].at(ix, iy, iz) = std::max(0.0, peak - slope * d);
            }
    return f;
}

}  // namespace

TEST_CASE("z_alpha: zero field is degenerate-true") {
    const GridSpec g(16, L);
    const auto res = z_alpha_check(VectorField3(g), ZAlphaParams{});
    CHECK(res.verdict);
    CHECK(res.degenerate);
}

TEST_CASE("z_alpha: full-box super-level set fails with witness ratio ~1") {
    const GridSpec g(16, L);
    VectorField3 f(g);
    for (auto& v : f[0].values) v = 1.0;
    ZAlphaParams p;
    p.delta = 0.5;
    p.alpha = 1.0;
    p.c0 = 2.0;
    const auto res = z_alpha_check(f, p);
    CHECK_FALSE(res.verdict);
    CHECK(res.worst_ratio == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("z_alpha: prescribed scale beyond the box is an error") {
    const GridSpec g(16, L);
    VectorField3 f(g);
    for (auto& v : f[0].values) v = 0.01;  // ||f||^-alpha = 100
    ZAlphaParams p;
    p.alpha = 1.0;
    CHECK_THROWS_AS(z_alpha_check(f, p), std::invalid_argument);
}

TEST_CASE("z_alpha: single ball passes exactly when a scale >= rho/delta^(1/3) is admissible") {
    const GridSpec g(48, L);
    const double h = g.spacing();
    const std::array<double, 3> c{L / 2, L / 2, L / 2};
    ZAlphaParams p;
    p.lambda = 0.5;
    p.delta = 0.5;
    p.c0 = 2.0;
    p.alpha = 1.0;
    p.restrict_to_active = true;  // points at/above the cut carry the decision

    // peak M fixes the admissible range [M^-1/2, 2 M^-1]; vary rho around the
    // pass/fail threshold rho* = scale_hi * delta^(1/3).
    const double peak = 2.0;  // scale_hi = 1.0
    const double rho_star = 1.0 * std::cbrt(p.delta);
    {
        VectorField3 f = single_ball_field(g, c, rho_star - 2 * h, p.lambda, peak);
        CHECK(z_alpha_check(f, p).verdict);
    }
    {
        VectorField3 f = single_ball_field(g, c, rho_star + 2 * h, p.lambda, peak);
        CHECK_FALSE(z_alpha_check(f, p).verdict);
    }
}

TEST_CASE("z_alpha: restricted and full modes agree on the single-ball verdict") {
    const GridSpec g(32, L);
    const std::array<double, 3> c{3.0, 3.0, 3.0};
    ZAlphaParams p;
    p.alpha = 1.0;
    const double peak = 2.0;
    for (double rho : {0.5, 1.1}) {
        VectorField3 f = single_ball_field(g, c, rho, p.lambda, peak);
        ZAlphaParams full = p, restricted = p;
        restricted.restrict_to_active = true;
        CHECK(z_alpha_check(f, full).verdict == z_alpha_check(f, restricted).verdict);
    }
}

TEST_CASE("z_alpha verdict is invariant under the compensated scaling f -> sigma f") {
    const GridSpec g(32, L);
    const std::array<double, 3> c{3.0, 3.0, 3.0};
    ZAlphaParams p;
    p.alpha = 1.0;
    p.restrict_to_active = true;
    const double peak = 2.0;
    for (double rho : {0.55, 0.95}) {
        VectorField3 f = single_ball_field(g, c, rho, p.lambda, peak);
        const auto base = z_alpha_check(f, p);
        // scale the field by sigma and adjust alpha so ||f||^-alpha is unchanged
        const double sigma = 4.0;
        const double f_max = max_norm(f);
        VectorField3 fs(g);
        for (int cc = 0; cc < 3; ++cc)
            for (size_t i = 0; i < f[cc].values.size(); ++i)
                fs[cc].values[i] = sigma * f[cc].values[i];
        ZAlphaParams ps = p;
        ps.alpha = p.alpha * std::log(f_max) / std::log(sigma * f_max);
        const auto scaled = z_alpha_check(fs, ps);
        CHECK(base.verdict == scaled.verdict);
        CHECK(base.worst_ratio == doctest::Approx(scaled.worst_ratio).epsilon(1e-9));
    }
}

// --- extraction -------------------------------------------------------------------------

TEST_CASE("extract_rivs pools components from all six parts") {
    const GridSpec g(32, L);
    VectorField3 f(g);
    // positive bump in component 0, negative bump in component 1
    const auto bump1 = ball_field(g, {2.0, 2.0, 2.0}, 0.8);
    const auto bump2 = ball_field(g, {5.0, 5.0, 5.0}, 0.5);
    for (size_t i = 0; i < f[0].values.size(); ++i) {
        f[0].values[i] = std::max(0.0, bump1.values[i]);
        f[1].values[i] = -2.0 * std::max(0.0, bump2.values[i]);
    }
    const auto ex = extract_rivs(f, 0.5, 26);
    REQUIRE(ex.rivs.size() == 2);
    CHECK(ex.rivs[0].source_component == 0);  // f1+ bump is larger
    CHECK(ex.rivs[1].source_component == 3);  // f2-
    CHECK(ex.rivs[0].threshold == ex.cut);
    CHECK(ex.rivs[0].component_id == 0);
    CHECK(ex.rivs[1].component_id == 1);
    CHECK(ex.f_max == max_norm(f));
}
