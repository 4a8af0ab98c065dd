#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "topoimg/oracle.hpp"
#include "topoimg/topofield.hpp"

using namespace topoimg;
using Catch::Approx;

namespace {

ScalarGrid const_grid(double value, FieldKind kind = FieldKind::TD, int n = 4) {
    ScalarGrid g;
    g.grid = InspectionGrid::square(0.1, n);
    g.kind = kind;
    g.values.assign(g.grid.node_count(), value);
    return g;
}

Dataset small_dielectric_dataset(double noise = 0.0) {
    return synth_dataset_2d({DiskScatterer{{0.03, -0.02}, 0.015, MaterialSpec::dielectric(3.0)}},
                            Layout2D::fresnel(), FrequencySweep::from_ghz({2.0, 4.0}),
                            SynthIncident::Isotropic, noise, 11);
}

}  // namespace

TEST_CASE("pointwise kernels: arithmetic pins", "[topofield]") {
    const double kappa = 120.0;
    // Vanishing contrast.
    CHECK(td_point_2d({1.0, 0.5}, {0.3, -0.2}, MaterialSpec::dielectric(1.0), kappa) == 0.0);
    // Conducting arithmetic.
    CHECK(td_point_2d({1.0, 0.0}, {0.0, 1.0}, MaterialSpec::conducting(), kappa) ==
          Approx(0.0).margin(1e-15));
    CHECK(td_point_2d({1.0, 0.0}, {1.0, 1.0}, MaterialSpec::conducting(), kappa) == Approx(1.0));

    // 3D pins.
    const CVec3 ex{Complex(1, 0), Complex(0, 0), Complex(0, 0)};
    CHECK(td_point_3d(ex, ex, MaterialSpec::dielectric(1.0), 1.0) == 0.0);
    CHECK(td_point_3d(ex, ex, MaterialSpec::dielectric(2.6), 1.0) ==
          Approx(-3.0 * 1.6 / 4.6).margin(1e-10));
    CHECK_THROWS_AS(td_point_3d(ex, ex, MaterialSpec::conducting(), 1.0), InputError);

    // Dielectric and conducting kernels differ only by the scaling factor
    // -kappa^2 (eps-1) at any field values.
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 50; ++i) {
        const Complex uu{u(rng), u(rng)}, vv{u(rng), u(rng)};
        const double diel = td_point_2d(uu, vv, MaterialSpec::dielectric(3.0), kappa);
        const double cond = td_point_2d(uu, vv, MaterialSpec::conducting(), kappa);
        CHECK(diel == Approx(-kappa * kappa * 2.0 * cond).margin(1e-12 * std::abs(diel)));
    }

    // Topological energy.
    CHECK(te_point(Complex(2.0, 0.0), Complex(0.0, 3.0)) == Approx(36.0));
    CHECK(te_point(Complex(0.7, -0.1), Complex(0.0, 0.0)) == 0.0);
    const CVec3 unit{Complex(1, 0), Complex(0, 0), Complex(0, 0)};
    const CVec3 v3{Complex(0, 1), Complex(2, 0), Complex(0, 0)};
    CHECK(te_point(unit, v3) == Approx(v3.squared_norm()));
}

TEST_CASE("combine_emitters is the nodewise mean", "[topofield]") {
    const ScalarGrid one = const_grid(1.0);
    CHECK(combine_emitters({one}).values == one.values);

    const ScalarGrid three = const_grid(3.0);
    const ScalarGrid mean = combine_emitters({one, three});
    for (double v : mean.values) CHECK(v == Approx(2.0));

    // Mean of 36 random fields equals the direct sum formula.
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<ScalarGrid> fields;
    for (int q = 0; q < 36; ++q) {
        ScalarGrid g = const_grid(0.0);
        for (double& v : g.values) v = u(rng);
        fields.push_back(g);
    }
    const ScalarGrid m = combine_emitters(fields);
    for (size_t i = 0; i < m.values.size(); ++i) {
        double direct = 0.0;
        for (const auto& f : fields) direct += f.values[i];
        direct /= 36.0;
        CHECK(std::abs(m.values[i] - direct) <= 1e-13 * std::max(1.0, std::abs(direct)));
    }

    ScalarGrid other = const_grid(1.0, FieldKind::TD, 5);
    CHECK_THROWS_AS(combine_emitters({one, other}), InputError);
}

TEST_CASE("combine_frequencies normalizes each summand", "[topofield]") {
    // Single field: scaled so the minimum is exactly -1.
    ScalarGrid f = const_grid(0.0);
    f.values[0] = -2.0;
    f.values[1] = 1.0;
    const ScalarGrid single = combine_frequencies({f}, FieldKind::TD);
    CHECK(single.min() == -1.0);

    // Two-node example: [-2, 1] and [-4, 2] both normalize to [-1, 0.5].
    ScalarGrid g = const_grid(0.0);
    g.values[0] = -4.0;
    g.values[1] = 2.0;
    const ScalarGrid comb = combine_frequencies({f, g}, FieldKind::TD);
    CHECK(comb.values[0] == Approx(-1.0));
    CHECK(comb.values[1] == Approx(0.5));

    // Positive per-frequency scaling leaves the combination unchanged.
    ScalarGrid scaled = f;
    for (double& v : scaled.values) v *= 37.5;
    const ScalarGrid comb2 = combine_frequencies({scaled, g}, FieldKind::TD);
    for (size_t i = 0; i < comb.values.size(); ++i) {
        CHECK(std::abs(comb2.values[i] - comb.values[i]) <=
              1e-12 * std::max(1.0, std::abs(comb.values[i])));
    }

    // Degenerate normalizers are reported with the frequency index.
    const ScalarGrid zero = const_grid(0.0);
    CHECK_THROWS_WITH(combine_frequencies({f, zero}, FieldKind::TD),
                      Catch::Matchers::ContainsSubstring("frequency index 1"));
    ScalarGrid te_zero = const_grid(0.0, FieldKind::TE);
    CHECK_THROWS_AS(combine_frequencies({te_zero}, FieldKind::TE), NumericalError);

    // TE normalizes by the maximum instead.
    ScalarGrid te = const_grid(0.0, FieldKind::TE);
    te.values[0] = 4.0;
    const ScalarGrid tec = combine_frequencies({te}, FieldKind::TE);
    CHECK(tec.max() == 1.0);
}

TEST_CASE("asymptotic factor selection", "[topofield]") {
    CHECK(asymptotic_factor(0.01, 2, MaterialKind::Dielectric, 100.0) ==
          Approx(kPi * 1e-4).epsilon(1e-14));
    CHECK(asymptotic_factor(0.01, 3, MaterialKind::Dielectric, 100.0) ==
          asymptotic_factor(0.01, 3, MaterialKind::Conducting, 100.0));
    // kappa * eps = 0.1 -> 2 pi / ln 10.
    CHECK(asymptotic_factor(0.001, 2, MaterialKind::Conducting, 100.0) ==
          Approx(2.7287527).margin(1e-6));
    CHECK_THROWS_AS(asymptotic_factor(0.02, 2, MaterialKind::Conducting, 100.0), InputError);
    CHECK_THROWS_AS(asymptotic_factor(-0.01, 2, MaterialKind::Dielectric, 100.0), InputError);
}

TEST_CASE("zero residuals: TD grid is identically zero and degenerate", "[topofield]") {
    const Dataset empty = synth_dataset_2d({}, Layout2D::fresnel(),
                                           FrequencySweep::from_ghz({2.0}),
                                           SynthIncident::Isotropic, 0.0, 1);
    EvalConfig cfg;
    cfg.grid = InspectionGrid::square(0.1, 12);
    cfg.material = MaterialSpec::dielectric(3.0);
    CHECK_THROWS_AS(evaluate_grid(empty, cfg), NumericalError);

    cfg.degenerate = DegeneratePolicy::Skip;
    CHECK_THROWS_WITH(evaluate_grid(empty, cfg),
                      Catch::Matchers::ContainsSubstring("every requested frequency"));
}

TEST_CASE("evaluate_grid is thread-count invariant", "[topofield]") {
    const Dataset d = small_dielectric_dataset();
    EvalConfig cfg;
    cfg.grid = InspectionGrid::square(0.1, 20);
    cfg.material = MaterialSpec::dielectric(3.0);
    cfg.threads = 1;
    const EvalResult r1 = evaluate_grid(d, cfg);
    cfg.threads = 4;
    const EvalResult r4 = evaluate_grid(d, cfg);
    CHECK(r1.combined.values == r4.combined.values);
}

TEST_CASE("3D evaluation is thread-count invariant too", "[topofield]") {
    const Dataset d = synth_dataset_3d({{{0.02, 0.01, -0.015}, Complex(0.0, 0.05)}},
                                       Layout3D::fresnel(), FrequencySweep::from_ghz({3.0}),
                                       Polarization::PP);
    EvalConfig cfg;
    cfg.grid = InspectionGrid::cube(0.1, 11);
    cfg.material = MaterialSpec::dielectric(2.6);
    cfg.threads = 1;
    const EvalResult r1 = evaluate_grid(d, cfg);
    cfg.threads = 5;
    const EvalResult r5 = evaluate_grid(d, cfg);
    CHECK(r1.combined.values == r5.combined.values);

    cfg.kind = FieldKind::TE;
    cfg.reciprocity = true;
    cfg.threads = 1;
    const EvalResult s1 = evaluate_grid(d, cfg);
    cfg.threads = 5;
    const EvalResult s5 = evaluate_grid(d, cfg);
    CHECK(s1.combined.values == s5.combined.values);
}

TEST_CASE("TD grids are linear in the residual sets", "[topofield]") {
    Dataset base = small_dielectric_dataset();

    // Two residual patterns r (from the oracle) and s (synthetic ripple).
    Dataset ds_r = base;
    Dataset ds_s = base;
    Dataset ds_mix = base;
    const double alpha = 0.6, beta = -1.7;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& [key, rec] : ds_s.records) {
        auto& mix_rec = ds_mix.records[key];
        auto& r_rec = ds_r.records[key];
        for (size_t j = 0; j < rec.rows.size(); ++j) {
            const Complex r = r_rec.rows[j].incident - r_rec.rows[j].total;
            const Complex s{u(rng), u(rng)};
            rec.rows[j].total = rec.rows[j].incident - s;
            mix_rec.rows[j].total = mix_rec.rows[j].incident - (alpha * r + beta * s);
        }
    }

    EvalConfig cfg;
    cfg.grid = InspectionGrid::square(0.1, 10);
    cfg.material = MaterialSpec::dielectric(3.0);
    cfg.frequencies = {1};
    cfg.emitters = {0, 7, 19};

    // Compare unnormalized single-frequency fields: run via the TD kernel on
    // one frequency and undo the self-normalization using the returned
    // normalizer.
    auto raw_field = [&](const Dataset& ds) {
        const EvalResult res = evaluate_grid(ds, cfg);
        ScalarGrid g = res.combined;
        for (double& v : g.values) v *= res.normalizers[0];
        return g;
    };
    const ScalarGrid gr = raw_field(ds_r);
    const ScalarGrid gs = raw_field(ds_s);
    const ScalarGrid gm = raw_field(ds_mix);
    double scale = 0.0;
    for (size_t i = 0; i < gm.values.size(); ++i) {
        scale = std::max(scale, std::abs(gm.values[i]));
    }
    for (size_t i = 0; i < gm.values.size(); ++i) {
        const double expect = alpha * gr.values[i] + beta * gs.values[i];
        CHECK(std::abs(gm.values[i] - expect) <= 1e-12 * scale);
    }
}

TEST_CASE("TE grids are nonnegative and TE pipeline runs", "[topofield]") {
    const Dataset d = small_dielectric_dataset();
    EvalConfig cfg;
    cfg.grid = InspectionGrid::square(0.1, 16);
    cfg.material = MaterialSpec::dielectric(3.0);
    cfg.kind = FieldKind::TE;
    const EvalResult res = evaluate_grid(d, cfg);
    for (double v : res.combined.values) CHECK(v >= 0.0);
    CHECK(res.combined.max() == 1.0);
}

TEST_CASE("per-frequency positive residual scaling leaves the combination alone",
          "[topofield]") {
    const Dataset d = small_dielectric_dataset();
    Dataset scaled = d;
    for (auto& [key, rec] : scaled.records) {
        if (key.freq_id != 0) continue;
        for (auto& row : rec.rows) {
            row.total = row.incident - 10.0 * (row.incident - row.total);
        }
    }
    EvalConfig cfg;
    cfg.grid = InspectionGrid::square(0.1, 14);
    cfg.material = MaterialSpec::dielectric(3.0);
    const EvalResult a = evaluate_grid(d, cfg);
    const EvalResult b = evaluate_grid(scaled, cfg);
    double scale = 0.0;
    for (double v : a.combined.values) scale = std::max(scale, std::abs(v));
    for (size_t i = 0; i < a.combined.values.size(); ++i) {
        CHECK(std::abs(a.combined.values[i] - b.combined.values[i]) <= 1e-12 * scale);
    }
    CHECK(a.combined.argmin() == b.combined.argmin());
}

TEST_CASE("evaluate_grid works on a custom 2D layout", "[topofield]") {
    Layout2D layout;
    layout.emitter_radius = 0.9;
    layout.receiver_radius = 0.65;
    for (int i = 0; i < 12; ++i) layout.emitter_azimuths_deg.push_back(30.0 * i);
    for (int i = 0; i < 17; ++i) layout.receiver_offsets_deg.push_back(75.0 + 12.5 * i);
    const Vec2 center{0.02, 0.01};
    const Dataset d =
        synth_dataset_2d({DiskScatterer{center, 0.012, MaterialSpec::conducting()}}, layout,
                         FrequencySweep::from_ghz({3.0}), SynthIncident::Isotropic, 0.0, 5);
    EvalConfig cfg;
    cfg.grid = InspectionGrid::square(0.1, 50);
    cfg.material = MaterialSpec::conducting();
    const EvalResult res = evaluate_grid(d, cfg);
    const Vec2 am = res.combined.grid.point2(res.combined.argmin());
    CHECK((am - center).norm() <= 0.012);  // 3 GHz on a small disk focuses
}

TEST_CASE("evaluate_grid input validation", "[topofield]") {
    const Dataset d = small_dielectric_dataset();
    EvalConfig cfg;
    cfg.grid = InspectionGrid::square(0.1, 8);
    cfg.material = MaterialSpec::dielectric(3.0);

    Dataset wrong = d;
    wrong.convention = TimeConvention::PosIOmegaT;
    CHECK_THROWS_AS(evaluate_grid(wrong, cfg), InputError);

    EvalConfig bad = cfg;
    bad.frequencies = {5};
    CHECK_THROWS_AS(evaluate_grid(d, bad), InputError);

    bad = cfg;
    bad.grid = InspectionGrid::cube(0.1, 8);
    CHECK_THROWS_AS(evaluate_grid(d, bad), InputError);

    bad = cfg;
    bad.reciprocity = true;
    CHECK_THROWS_AS(evaluate_grid(d, bad), InputError);
}

TEST_CASE("reciprocity-swapped TE runs and stays nonnegative", "[topofield]") {
    const Dataset d = synth_dataset_3d({{{0.02, 0.01, -0.015}, Complex(0.0, 0.05)}},
                                       Layout3D::fresnel(), FrequencySweep::from_ghz({3.0}),
                                       Polarization::PP);
    EvalConfig cfg;
    cfg.grid = InspectionGrid::cube(0.1, 9);
    cfg.material = MaterialSpec::dielectric(2.6);
    cfg.kind = FieldKind::TE;
    cfg.reciprocity = true;
    const EvalResult res = evaluate_grid(d, cfg);
    for (double v : res.combined.values) CHECK(v >= 0.0);
    CHECK(res.combined.max() == 1.0);

    // Swapped and plain TE fields are genuinely different objects.
    cfg.reciprocity = false;
    const EvalResult plain = evaluate_grid(d, cfg);
    CHECK(plain.combined.values != res.combined.values);
}

TEST_CASE("3D TE field is even in z across the receiver plane", "[topofield]") {
    const Dataset d = synth_dataset_3d({{{0.02, 0.01, -0.015}, Complex(0.0, 0.05)}},
                                       Layout3D::fresnel(), FrequencySweep::from_ghz({3.0}),
                                       Polarization::PP);
    EvalConfig cfg;
    cfg.grid = InspectionGrid::cube(0.1, 9);
    cfg.material = MaterialSpec::dielectric(2.6);
    cfg.kind = FieldKind::TE;
    const EvalResult res = evaluate_grid(d, cfg);
    const auto& g = res.combined;
    const int n = g.grid.res[0];
    for (int iz = 0; iz < n; ++iz) {
        for (int iy = 0; iy < n; ++iy) {
            for (int ix = 0; ix < n; ++ix) {
                const double a = g.values[g.grid.flat_index(ix, iy, iz)];
                const double b = g.values[g.grid.flat_index(ix, iy, n - 1 - iz)];
                CHECK(std::abs(a - b) <= 1e-12 * std::max(std::abs(a), 1e-300));
            }
        }
    }
}
