#include "topoimg/cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "topoimg/dataset.hpp"
#include "topoimg/oracle.hpp"
#include "topoimg/regions.hpp"
#include "topoimg/textio.hpp"
#include "topoimg/topofield.hpp"

namespace topoimg {

namespace {

using nlohmann::json;

// ---- small shared helpers ---------------------------------------------

std::vector<double> parse_freqs_ghz(const std::string& text) {
    std::vector<double> out;
    std::string token;
    std::istringstream ss(text);
    while (std::getline(ss, token, ',')) {
        if (token.size() >= 3 && (token.ends_with("GHz") || token.ends_with("ghz"))) {
            token = token.substr(0, token.size() - 3);
        }
        out.push_back(parse_double(token));
    }
    if (out.empty()) throw InputError("empty frequency list");
    return out;
}

MaterialSpec parse_material(const std::string& text) {
    if (text == "cond" || text == "conducting") return MaterialSpec::conducting();
    if (text.rfind("diel:", 0) == 0) {
        return MaterialSpec::dielectric(parse_double(std::string_view(text).substr(5)));
    }
    throw InputError("material must be 'diel:<eps>' or 'cond', got '" + text + "'");
}

struct MetaWriter {
    json config;
    json artifacts = json::array();

    void add_artifact(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw InputError("meta: cannot re-read artifact " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        const std::string bytes = buf.str();
        char hex[9];
        std::snprintf(hex, sizeof(hex), "%08x", crc32_bytes(bytes.data(), bytes.size()));
        artifacts.push_back({{"path", path}, {"crc32", hex}, {"bytes", bytes.size()}});
    }

    void write(const std::string& prefix) {
        json meta;
        meta["config"] = config;
        meta["artifacts"] = artifacts;
        std::ofstream out(prefix + ".meta.json", std::ios::binary);
        if (!out) throw InputError("cannot open for writing: " + prefix + ".meta.json");
        out << meta.dump(2) << '\n';
    }
};

Dataset load_dataset(const std::string& path, const std::string& mapping_name,
                     const std::vector<double>& freqs_ghz,
                     const std::string& convention_override = "") {
    if (mapping_name.empty()) {
        Dataset d = read_canonical_file(path);
        if (convention_override == "e-iwt") d.convention = TimeConvention::NegIOmegaT;
        if (convention_override == "e+iwt") d.convention = TimeConvention::PosIOmegaT;
        return to_working_convention(d);
    }
    ColumnMapping mapping = ColumnMapping::by_name(mapping_name);
    if (convention_override == "e-iwt") mapping.convention = TimeConvention::NegIOmegaT;
    if (convention_override == "e+iwt") mapping.convention = TimeConvention::PosIOmegaT;
    if (!convention_override.empty() && convention_override != "e-iwt" &&
        convention_override != "e+iwt") {
        throw InputError("--convention must be e-iwt or e+iwt");
    }

    // Raw columnar file: discover the frequency sweep unless given.
    std::vector<double> ghz = freqs_ghz;
    if (ghz.empty()) {
        std::ifstream scan(path, std::ios::binary);
        if (!scan) throw InputError("cannot open for reading: " + path);
        int freq_col = -1;
        for (size_t c = 0; c < mapping.roles.size(); ++c) {
            if (mapping.roles[c] == ColumnRole::FrequencyGhz) freq_col = (int)c;
        }
        std::set<double> uniq;
        std::string line;
        while (std::getline(scan, line)) {
            if (line.empty() || line.rfind(mapping.comment_prefix, 0) == 0) continue;
            const auto f = split_fields(line);
            if ((int)f.size() > freq_col) uniq.insert(parse_double(f[freq_col]));
        }
        ghz.assign(uniq.begin(), uniq.end());
        if (ghz.empty()) throw InputError("no data rows found in " + path);
    }
    const FrequencySweep sweep = FrequencySweep::from_ghz(ghz);

    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open for reading: " + path);
    Dataset d = (mapping_name == "fresnel2d")
                    ? parse_columnar(in, mapping, Layout2D::fresnel(), sweep)
                    : parse_columnar(in, mapping, Layout3D::fresnel(), sweep);
    return to_working_convention(d);
}

std::vector<int> freq_subset_ids(const FrequencySweep& sweep, const std::vector<double>& ghz) {
    std::vector<int> ids;
    for (double g : ghz) {
        int found = -1;
        for (int k = 0; k < sweep.count(); ++k) {
            if (std::abs(sweep.hz(k) - g * 1e9) <= std::max(1e3, 1e-6 * sweep.hz(k))) found = k;
        }
        if (found < 0) {
            throw InputError("frequency " + fmt_double(g) + " GHz not present in the dataset");
        }
        ids.push_back(found);
    }
    return ids;
}

// ---- subcommand options -------------------------------------------------

struct SynthOpts {
    int dim = 2;
    std::vector<std::string> shapes;
    std::string material = "diel:3";
    std::string freqs;
    std::string incident = "isotropic";
    double noise = 0.0;
    unsigned long long seed = 0;
    double born_re = 0.0, born_im = 0.05;
    double bounds_half = 0.1;
    std::string prefix;
};

int cmd_synth(const SynthOpts& o) {
    const MaterialSpec mat = parse_material(o.material);
    const FrequencySweep sweep = FrequencySweep::from_ghz(parse_freqs_ghz(o.freqs));

    ShapeTruth truth;
    std::vector<DiskScatterer> disks;
    std::vector<BornPointScatterer3D> points;
    for (const std::string& s : o.shapes) {
        if (s.rfind("disk:", 0) == 0) {
            const auto f = split_fields(std::string_view(s).substr(5));
            if (f.size() != 3) throw InputError("disk shape needs cx,cy,r");
            DiskScatterer d{{parse_double(f[0]), parse_double(f[1])}, parse_double(f[2]), mat};
            if (std::abs(d.center.x) + d.radius > o.bounds_half ||
                std::abs(d.center.y) + d.radius > o.bounds_half) {
                throw InputError("shape outside inspection bounds");
            }
            disks.push_back(d);
            truth.shapes.push_back({ShapePrimitive::Type::Disk,
                                    {d.center.x, d.center.y, 0.0},
                                    d.radius,
                                    {},
                                    o.material});
        } else if (s.rfind("point:", 0) == 0) {
            const auto f = split_fields(std::string_view(s).substr(6));
            if (f.size() != 3) throw InputError("point shape needs x,y,z");
            BornPointScatterer3D p{{parse_double(f[0]), parse_double(f[1]), parse_double(f[2])},
                                   Complex(o.born_re, o.born_im)};
            if (std::abs(p.location.x) > o.bounds_half || std::abs(p.location.y) > o.bounds_half ||
                std::abs(p.location.z) > o.bounds_half) {
                throw InputError("shape outside inspection bounds");
            }
            points.push_back(p);
            truth.shapes.push_back(
                {ShapePrimitive::Type::Point, p.location, 0.0, {}, "born"});
        } else {
            throw InputError("shape must be disk:cx,cy,r or point:x,y,z, got '" + s + "'");
        }
    }

    Dataset d;
    if (o.dim == 2) {
        if (!points.empty()) throw InputError("point shapes are 3D only");
        const SynthIncident kind =
            o.incident == "plane" ? SynthIncident::Plane : SynthIncident::Isotropic;
        d = synth_dataset_2d(disks, Layout2D::fresnel(), sweep, kind, o.noise, o.seed);
    } else if (o.dim == 3) {
        if (!disks.empty()) throw InputError("disk shapes are 2D only");
        d = synth_dataset_3d(points, Layout3D::fresnel(), sweep, Polarization::PP);
    } else {
        throw InputError("--dim must be 2 or 3");
    }

    MetaWriter meta;
    meta.config = {{"command", "synth"},   {"dim", o.dim},       {"shapes", o.shapes},
                   {"material", o.material}, {"freqs", o.freqs}, {"incident", o.incident},
                   {"noise", o.noise},     {"seed", o.seed},     {"prefix", o.prefix}};
    write_canonical_file(d, o.prefix + ".dataset.txt");
    meta.add_artifact(o.prefix + ".dataset.txt");
    write_truth_json(truth, o.prefix + ".truth.json");
    meta.add_artifact(o.prefix + ".truth.json");
    meta.write(o.prefix);
    std::cout << "synth: wrote " << d.records.size() << " records to " << o.prefix
              << ".dataset.txt\n";
    return 0;
}

struct InvertOpts {
    std::string dataset;
    std::string mapping;
    std::string convention;
    std::string kind = "td";
    std::string material = "diel:3";
    std::string incident = "isotropic";
    int hankel_modes = 14;
    std::string freqs;     // subset in GHz; empty = all
    std::string emitters;  // comma list of ids; empty = all
    std::string lambdas = "0.7,0.9";
    int grid_n = 0;  // 0 = default per dim
    double grid_half = 0.1;
    bool reciprocity = false;
    bool strict = false;
    int threads = 1;
    long prune_min_cells = 0;
    std::string truth_path;
    std::string prefix;
};

int cmd_invert(const InvertOpts& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset d = load_dataset(o.dataset, o.mapping, {}, o.convention);

    EvalConfig cfg;
    cfg.grid = (d.dim == 2) ? InspectionGrid::square(o.grid_half, o.grid_n ? o.grid_n : 100)
                            : InspectionGrid::cube(o.grid_half, o.grid_n ? o.grid_n : 41);
    cfg.material = parse_material(o.material);
    cfg.kind = (o.kind == "te") ? FieldKind::TE : FieldKind::TD;
    if (o.kind != "td" && o.kind != "te") throw InputError("--kind must be td or te");
    if (o.incident == "isotropic") {
        cfg.incident = IncidentChoice::Isotropic;
    } else if (o.incident == "plane") {
        cfg.incident = IncidentChoice::Plane;
    } else if (o.incident == "hankel") {
        cfg.incident = IncidentChoice::Hankel;
    } else {
        throw InputError("--incident must be isotropic, plane or hankel");
    }
    cfg.hankel_modes = o.hankel_modes;
    if (!o.freqs.empty()) cfg.frequencies = freq_subset_ids(d.sweep, parse_freqs_ghz(o.freqs));
    if (!o.emitters.empty()) {
        for (auto tok : split_fields(o.emitters)) cfg.emitters.push_back((int)parse_long(tok));
    }
    cfg.reciprocity = o.reciprocity;
    cfg.threads = o.threads;
    cfg.degenerate = o.strict ? DegeneratePolicy::Strict : DegeneratePolicy::Skip;

    const EvalResult res = evaluate_grid(d, cfg);
    for (int k : res.skipped_frequencies) {
        std::cerr << "warning: frequency index " << k << " skipped (zero normalizer)\n";
    }

    MetaWriter meta;
    meta.config = {{"command", "invert"},     {"dataset", o.dataset},
                   {"mapping", o.mapping},    {"kind", o.kind},
                   {"material", o.material},  {"incident", o.incident},
                   {"freqs", o.freqs},        {"emitters", o.emitters},
                   {"lambdas", o.lambdas},    {"grid_n", cfg.grid.res[0]},
                   {"grid_half", o.grid_half}, {"reciprocity", o.reciprocity},
                   {"strict", o.strict},      {"threads", o.threads},
                   {"prune", o.prune_min_cells},
                   {"prefix", o.prefix},      {"skipped", res.skipped_frequencies}};

    write_grid_csv(res.combined, o.prefix + ".field.csv");
    meta.add_artifact(o.prefix + ".field.csv");
    write_grid_sidecar(res.combined, o.prefix + ".field.json");
    meta.add_artifact(o.prefix + ".field.json");
    write_grid_ppm(res.combined, o.prefix + ".field.ppm");
    meta.add_artifact(o.prefix + ".field.ppm");

    ShapeTruth truth;
    const bool have_truth = !o.truth_path.empty();
    if (have_truth) truth = read_truth_json(o.truth_path);

    for (const auto tok : split_fields(o.lambdas)) {
        const double lambda = parse_double(tok);
        RegionMask mask = extract(res.combined, lambda);
        if (o.prune_min_cells > 0) mask = prune_small_components(mask, o.prune_min_cells);
        const std::string tag = std::string(tok);
        write_mask_csv(mask, o.prefix + ".mask" + tag + ".csv");
        meta.add_artifact(o.prefix + ".mask" + tag + ".csv");
        if (have_truth) {
            write_metrics_json(score(mask, truth), o.prefix + ".metrics" + tag + ".json");
            meta.add_artifact(o.prefix + ".metrics" + tag + ".json");
        }
    }

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    meta.config["runtime_s"] = secs;
    meta.config["nodes"] = res.combined.grid.node_count();
    meta.write(o.prefix);
    std::cout << "invert: " << res.combined.grid.node_count() << " nodes in " << secs << " s\n";
    return 0;
}

struct FitOpts {
    std::string dataset;
    std::string mapping;
    std::string convention;
    int modes = 14;
    std::string prefix;
};

int cmd_fit_incident(const FitOpts& o) {
    const Dataset d = load_dataset(o.dataset, o.mapping, {}, o.convention);
    if (d.dim != 2) throw InputError("fit-incident: 2D dataset required");

    std::ofstream models(o.prefix + ".models.txt", std::ios::binary);
    std::ofstream table(o.prefix + ".residuals.tsv", std::ios::binary);
    if (!models || !table) throw InputError("cannot open fit outputs for writing");
    table << "emitter_id\tfreq_id\tresidual\tcondition\n";

    for (const auto& [key, rec] : d.records) {
        const double az = d.layout2d.emitter_azimuths_deg.at(key.emitter_id);
        const double kappa = d.sweep.kappa(key.freq_id);
        const Vec2 epos = emitter_position_2d(d.layout2d, az);
        std::vector<std::pair<Vec2, Complex>> samples;
        for (const auto& row : rec.rows) {
            samples.push_back(
                {receiver_position_2d(d.layout2d, az, row.receiver_id), row.incident});
        }
        const HankelFit fit = fit_hankel_series(samples, epos, kappa, o.modes);
        models << key.emitter_id << '\t' << key.freq_id << '\t' << model_to_text(fit.model)
               << '\n';
        table << key.emitter_id << '\t' << key.freq_id << '\t' << fmt_double(fit.residual_norm)
              << '\t' << fmt_double(fit.condition) << '\n';
    }
    models.close();
    table.close();

    MetaWriter meta;
    meta.config = {{"command", "fit-incident"},
                   {"dataset", o.dataset},
                   {"mapping", o.mapping},
                   {"modes", o.modes},
                   {"prefix", o.prefix}};
    meta.add_artifact(o.prefix + ".models.txt");
    meta.add_artifact(o.prefix + ".residuals.tsv");
    meta.write(o.prefix);
    return 0;
}

struct MetricsOpts {
    std::string mask_path;
    std::string truth_path;
    std::string prefix;
};

int cmd_metrics(const MetricsOpts& o) {
    const RegionMask mask = read_mask_csv(o.mask_path);
    if (mask.count() == 0) throw InputError("metrics: empty mask file");
    const ShapeTruth truth = read_truth_json(o.truth_path);
    const RegionMetrics m = score(mask, truth);
    write_metrics_json(m, o.prefix + ".metrics.json");

    MetaWriter meta;
    meta.config = {{"command", "metrics"},
                   {"mask", o.mask_path},
                   {"truth", o.truth_path},
                   {"prefix", o.prefix}};
    meta.add_artifact(o.prefix + ".metrics.json");
    meta.write(o.prefix);
    std::cout << "jaccard " << m.jaccard << " offset_m " << m.centroid_offset << '\n';
    return 0;
}

struct ValidateOpts {
    std::string dataset;
    std::string mapping;
    std::string convention;
};

int cmd_validate(const ValidateOpts& o) {
    const Dataset d = load_dataset(o.dataset, o.mapping, {}, o.convention);
    const ValidationReport rep = validate(d);
    json issues = json::array();
    for (const auto& issue : rep.issues) {
        const char* kind = nullptr;
        switch (issue.kind) {
            case IssueKind::MissingPair: kind = "missing-pair"; break;
            case IssueKind::IncompleteReceivers: kind = "incomplete-receivers"; break;
            case IssueKind::NonFinite: kind = "non-finite"; break;
            case IssueKind::Outlier: kind = "outlier"; break;
        }
        issues.push_back({{"kind", kind},
                          {"emitter", issue.key.emitter_id},
                          {"freq", issue.key.freq_id},
                          {"receiver", issue.receiver_id},
                          {"message", issue.message}});
    }
    json out;
    out["issues"] = issues;
    out["clean"] = rep.clean();
    std::cout << out.dump(2) << '\n';
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Topological-derivative imaging for multistatic microwave data"};
    app.require_subcommand(1);
    app.set_config("--config");

    SynthOpts so;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset from the oracle");
    synth->add_option("--dim", so.dim, "2 or 3");
    synth->add_option("--shape", so.shapes, "disk:cx,cy,r (2D) or point:x,y,z (3D)")->required();
    synth->add_option("--material", so.material, "diel:<eps> or cond");
    synth->add_option("--freqs", so.freqs, "comma list, GHz")->required();
    synth->add_option("--incident", so.incident, "isotropic or plane");
    synth->add_option("--noise", so.noise, "relative noise std");
    synth->add_option("--seed", so.seed, "noise seed");
    synth->add_option("--born-amplitude-re", so.born_re, "3D Born coupling, real part");
    synth->add_option("--born-amplitude-im", so.born_im, "3D Born coupling, imag part");
    synth->add_option("--bounds-half", so.bounds_half, "inspection half extent");
    synth->add_option("--out", so.prefix, "output prefix")->required();

    InvertOpts io;
    auto* invert = app.add_subcommand("invert", "Evaluate indicator fields and extract regions");
    invert->add_option("--dataset", io.dataset)->required();
    invert->add_option("--mapping", io.mapping, "raw-file mapping preset (else canonical)");
    invert->add_option("--convention", io.convention,
                       "override the stored time convention (e-iwt or e+iwt)");
    invert->add_option("--kind", io.kind, "td or te");
    invert->add_option("--material", io.material, "diel:<eps> or cond");
    invert->add_option("--incident", io.incident, "isotropic, plane or hankel");
    invert->add_option("--modes", io.hankel_modes, "hankel fit modes");
    invert->add_option("--freqs", io.freqs, "frequency subset, GHz");
    invert->add_option("--emitters", io.emitters, "emitter id subset");
    invert->add_option("--lambda", io.lambdas, "threshold list");
    invert->add_option("--grid-n", io.grid_n, "nodes per axis");
    invert->add_option("--grid-half", io.grid_half, "inspection half extent");
    invert->add_flag("--reciprocity", io.reciprocity, "3D TE emitter/receiver swap");
    invert->add_flag("--strict", io.strict, "fail on degenerate frequencies");
    invert->add_option("--prune", io.prune_min_cells,
                       "drop mask components smaller than this many cells");
    invert->add_option("--threads", io.threads, "worker threads (0 = hardware)");
    invert->add_option("--truth", io.truth_path, "truth JSON for metrics");
    invert->add_option("--out", io.prefix, "output prefix")->required();

    FitOpts fo;
    auto* fit = app.add_subcommand("fit-incident", "Least-squares incident-field fits");
    fit->add_option("--dataset", fo.dataset)->required();
    fit->add_option("--mapping", fo.mapping);
    fit->add_option("--convention", fo.convention);
    fit->add_option("--modes", fo.modes);
    fit->add_option("--out", fo.prefix)->required();

    MetricsOpts mo;
    auto* metrics = app.add_subcommand("metrics", "Score a mask against truth shapes");
    metrics->add_option("--mask", mo.mask_path)->required();
    metrics->add_option("--truth", mo.truth_path)->required();
    metrics->add_option("--out", mo.prefix)->required();

    ValidateOpts vo;
    auto* validate_cmd = app.add_subcommand("validate", "Report dataset integrity issues");
    validate_cmd->add_option("--dataset", vo.dataset)->required();
    validate_cmd->add_option("--mapping", vo.mapping);
    validate_cmd->add_option("--convention", vo.convention);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (*synth) return cmd_synth(so);
        if (*invert) return cmd_invert(io);
        if (*fit) return cmd_fit_incident(fo);
        if (*metrics) return cmd_metrics(mo);
        if (*validate_cmd) return cmd_validate(vo);
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace topoimg
