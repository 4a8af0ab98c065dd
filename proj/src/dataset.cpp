#include "topoimg/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "topoimg/textio.hpp"

namespace topoimg {

namespace {

double circular_gap_deg(double a, double b) {
    double d = std::fmod(std::abs(a - b), 360.0);
    return std::min(d, 360.0 - d);
}

int match_angle(const std::vector<double>& list, double value_deg, double tol_deg) {
    for (int i = 0; i < (int)list.size(); ++i) {
        if (circular_gap_deg(list[i], value_deg) <= tol_deg) return i;
    }
    return -1;
}

int match_frequency(const FrequencySweep& sweep, double hz) {
    for (int k = 0; k < sweep.count(); ++k) {
        if (std::abs(sweep.hz(k) - hz) <= std::max(1e3, 1e-6 * sweep.hz(k))) return k;
    }
    return -1;
}

double min_step(const std::vector<double>& sorted_like) {
    std::vector<double> v = sorted_like;
    std::sort(v.begin(), v.end());
    double m = 360.0;
    for (size_t i = 1; i < v.size(); ++i) m = std::min(m, v[i] - v[i - 1]);
    return m;
}

const char* pol_token(Polarization p) {
    switch (p) {
        case Polarization::PP: return "PP";
        case Polarization::TP: return "TP";
        default: return "-";
    }
}

Polarization parse_pol(std::string_view s) {
    if (s == "PP") return Polarization::PP;
    if (s == "TP") return Polarization::TP;
    if (s == "-") return Polarization::None;
    throw InputError("bad polarization token: '" + std::string(s) + "'");
}

struct RowValues {
    double emitter_angle = 0.0, emitter_altitude = 90.0, receiver_angle = 0.0, freq_ghz = 0.0;
    double tot_re = 0.0, tot_im = 0.0, inc_re = 0.0, inc_im = 0.0;
};

RowValues decode_row(const std::vector<std::string_view>& fields, const ColumnMapping& m,
                     long line_no) {
    if (fields.size() != m.roles.size()) {
        throw InputError("line " + std::to_string(line_no) + ": expected " +
                         std::to_string(m.roles.size()) + " columns, got " +
                         std::to_string(fields.size()));
    }
    RowValues v;
    for (size_t c = 0; c < fields.size(); ++c) {
        if (m.roles[c] == ColumnRole::Skip) continue;
        double x;
        try {
            x = parse_double(fields[c]);
        } catch (const InputError&) {
            throw InputError("line " + std::to_string(line_no) + ": malformed number '" +
                             std::string(fields[c]) + "'");
        }
        switch (m.roles[c]) {
            case ColumnRole::EmitterAngleDeg: v.emitter_angle = x; break;
            case ColumnRole::EmitterAltitudeDeg: v.emitter_altitude = x; break;
            case ColumnRole::ReceiverAngleDeg: v.receiver_angle = x; break;
            case ColumnRole::FrequencyGhz: v.freq_ghz = x; break;
            case ColumnRole::TotalRe: v.tot_re = x; break;
            case ColumnRole::TotalIm: v.tot_im = x; break;
            case ColumnRole::IncidentRe: v.inc_re = x; break;
            case ColumnRole::IncidentIm: v.inc_im = x; break;
            default: break;
        }
    }
    return v;
}

void insert_row(Dataset& d, const RecordKey& key, const SampleRow& row, long line_no) {
    auto& rec = d.records[key];
    rec.key = key;
    for (const auto& r : rec.rows) {
        if (r.receiver_id == row.receiver_id) {
            throw InputError("line " + std::to_string(line_no) +
                             ": duplicate (emitter, frequency, receiver) triple");
        }
    }
    rec.rows.push_back(row);
}

}  // namespace

const ExperimentRecord& Dataset::record(const RecordKey& key) const {
    auto it = records.find(key);
    if (it == records.end()) {
        throw InputError("missing record (emitter " + std::to_string(key.emitter_id) +
                         ", freq " + std::to_string(key.freq_id) + ")");
    }
    return it->second;
}

ColumnMapping ColumnMapping::fresnel2d() {
    ColumnMapping m;
    m.roles = {ColumnRole::EmitterAngleDeg, ColumnRole::ReceiverAngleDeg,
               ColumnRole::FrequencyGhz,   ColumnRole::TotalRe,
               ColumnRole::TotalIm,        ColumnRole::IncidentRe,
               ColumnRole::IncidentIm};
    m.angle_tolerance_deg = 2.0;
    m.receiver_angle_is_offset = false;
    // The 2D database stores the opposite time convention.
    m.convention = TimeConvention::PosIOmegaT;
    m.polarization = Polarization::None;
    return m;
}

ColumnMapping ColumnMapping::fresnel3d(Polarization pol) {
    ColumnMapping m;
    m.roles = {ColumnRole::EmitterAngleDeg, ColumnRole::EmitterAltitudeDeg,
               ColumnRole::ReceiverAngleDeg, ColumnRole::FrequencyGhz,
               ColumnRole::TotalRe,          ColumnRole::TotalIm,
               ColumnRole::IncidentRe,       ColumnRole::IncidentIm};
    m.angle_tolerance_deg = 4.0;
    m.receiver_angle_is_offset = false;
    m.convention = TimeConvention::NegIOmegaT;
    m.polarization = pol;
    return m;
}

ColumnMapping ColumnMapping::by_name(const std::string& name) {
    if (name == "fresnel2d") return fresnel2d();
    if (name == "fresnel3d-pp") return fresnel3d(Polarization::PP);
    if (name == "fresnel3d-tp") return fresnel3d(Polarization::TP);
    throw InputError("unknown mapping preset: " + name);
}

void ColumnMapping::validate(int dim) const {
    std::array<int, 9> counts{};
    for (ColumnRole r : roles) counts[(int)r]++;
    auto need = [&](ColumnRole r, const char* name) {
        if (counts[(int)r] != 1) {
            throw InputError(std::string("mapping needs exactly one ") + name + " column");
        }
    };
    need(ColumnRole::EmitterAngleDeg, "emitter angle");
    need(ColumnRole::ReceiverAngleDeg, "receiver angle");
    need(ColumnRole::FrequencyGhz, "frequency");
    need(ColumnRole::TotalRe, "total-real");
    need(ColumnRole::TotalIm, "total-imag");
    need(ColumnRole::IncidentRe, "incident-real");
    need(ColumnRole::IncidentIm, "incident-imag");
    if (dim == 3) need(ColumnRole::EmitterAltitudeDeg, "emitter altitude");
    if (angle_tolerance_deg <= 0.0) throw InputError("mapping tolerance must be positive");
}

Dataset parse_columnar(std::istream& in, const ColumnMapping& mapping, const Layout2D& layout,
                       const FrequencySweep& sweep) {
    mapping.validate(2);
    layout.validate();
    sweep.validate();
    const double half_step =
        std::min(min_step(layout.emitter_azimuths_deg), min_step(layout.receiver_offsets_deg)) /
        2.0;
    if (mapping.angle_tolerance_deg >= half_step) {
        throw InputError("mapping tolerance " + std::to_string(mapping.angle_tolerance_deg) +
                         " deg must stay below half the smallest angular step " +
                         std::to_string(half_step));
    }

    Dataset d;
    d.dim = 2;
    d.layout2d = layout;
    d.sweep = sweep;
    d.convention = mapping.convention;

    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.rfind(mapping.comment_prefix, 0) == 0) continue;
        const auto fields = split_fields(line);
        if (fields.empty()) continue;
        const RowValues v = decode_row(fields, mapping, line_no);

        const int e = match_angle(layout.emitter_azimuths_deg, v.emitter_angle,
                                  mapping.angle_tolerance_deg);
        if (e < 0) {
            throw InputError("line " + std::to_string(line_no) + ": unmappable emitter angle " +
                             std::to_string(v.emitter_angle));
        }
        const double offset = mapping.receiver_angle_is_offset
                                  ? v.receiver_angle
                                  : v.receiver_angle - layout.emitter_azimuths_deg[e];
        const int j = match_angle(layout.receiver_offsets_deg, offset,
                                  mapping.angle_tolerance_deg);
        if (j < 0) {
            throw InputError("line " + std::to_string(line_no) + ": unmappable angle " +
                             std::to_string(v.receiver_angle));
        }
        const int k = match_frequency(sweep, v.freq_ghz * 1e9);
        if (k < 0) {
            throw InputError("line " + std::to_string(line_no) + ": unknown frequency " +
                             std::to_string(v.freq_ghz) + " GHz");
        }
        insert_row(d, {e, k, Polarization::None},
                   {j + 1, Complex(v.inc_re, v.inc_im), Complex(v.tot_re, v.tot_im)}, line_no);
    }
    return d;
}

Dataset parse_columnar(std::istream& in, const ColumnMapping& mapping, const Layout3D& layout,
                       const FrequencySweep& sweep) {
    mapping.validate(3);
    layout.validate();
    sweep.validate();
    const double half_step = std::min({min_step(layout.emitter_azimuths_deg),
                                       min_step(layout.emitter_altitudes_deg),
                                       min_step(layout.receiver_offsets_deg)}) /
                             2.0;
    if (mapping.angle_tolerance_deg >= half_step) {
        throw InputError("mapping tolerance " + std::to_string(mapping.angle_tolerance_deg) +
                         " deg must stay below half the smallest angular step " +
                         std::to_string(half_step));
    }

    Dataset d;
    d.dim = 3;
    d.layout3d = layout;
    d.sweep = sweep;
    d.convention = mapping.convention;

    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.rfind(mapping.comment_prefix, 0) == 0) continue;
        const auto fields = split_fields(line);
        if (fields.empty()) continue;
        const RowValues v = decode_row(fields, mapping, line_no);

        const int pi = match_angle(layout.emitter_azimuths_deg, v.emitter_angle,
                                   mapping.angle_tolerance_deg);
        const int qi = match_angle(layout.emitter_altitudes_deg, v.emitter_altitude,
                                   mapping.angle_tolerance_deg);
        if (pi < 0 || qi < 0) {
            throw InputError("line " + std::to_string(line_no) + ": unmappable emitter angles");
        }
        const double offset = mapping.receiver_angle_is_offset
                                  ? v.receiver_angle
                                  : v.receiver_angle - layout.emitter_azimuths_deg[pi];
        const int j = match_angle(layout.receiver_offsets_deg, offset,
                                  mapping.angle_tolerance_deg);
        if (j < 0) {
            throw InputError("line " + std::to_string(line_no) + ": unmappable angle " +
                             std::to_string(v.receiver_angle));
        }
        const int k = match_frequency(sweep, v.freq_ghz * 1e9);
        if (k < 0) {
            throw InputError("line " + std::to_string(line_no) + ": unknown frequency " +
                             std::to_string(v.freq_ghz) + " GHz");
        }
        insert_row(d, {layout.emitter_flat_id(pi + 1, qi + 1), k, mapping.polarization},
                   {j + 1, Complex(v.inc_re, v.inc_im), Complex(v.tot_re, v.tot_im)}, line_no);
    }
    return d;
}

Dataset to_working_convention(const Dataset& d) {
    if (d.convention == TimeConvention::NegIOmegaT) return d;
    Dataset out = d;
    out.convention = TimeConvention::NegIOmegaT;
    for (auto& [key, rec] : out.records) {
        for (auto& row : rec.rows) {
            row.incident = std::conj(row.incident);
            row.total = std::conj(row.total);
        }
    }
    return out;
}

std::vector<double> reciprocity_slots(const Layout3D& layout) {
    std::vector<double> slots;
    for (int p = 1; p <= layout.azimuth_count(); ++p) {
        for (int j = 1; j <= layout.receiver_count(); ++j) {
            const double a = receiver_azimuth_3d(layout, p, j);
            bool found = false;
            for (double s : slots) {
                if (circular_gap_deg(s, a) < 1e-6) {
                    found = true;
                    break;
                }
            }
            if (!found) slots.push_back(a);
        }
    }
    std::sort(slots.begin(), slots.end());
    return slots;
}

Dataset reciprocity_swap(const Dataset& d) {
    if (d.dim != 3) throw InputError("reciprocity_swap: 3D dataset required");
    const Layout3D& layout = d.layout3d;
    const std::vector<double> slots = reciprocity_slots(layout);

    auto slot_of = [&](double azimuth) {
        for (int s = 0; s < (int)slots.size(); ++s) {
            if (circular_gap_deg(slots[s], azimuth) < 1e-6) return s;
        }
        throw NumericalError("reciprocity_swap: azimuth has no slot");
    };

    Dataset out;
    out.dim = 3;
    out.layout3d = layout;
    out.sweep = d.sweep;
    out.convention = d.convention;
    out.metadata = d.metadata;
    out.swapped = !d.swapped;

    if (!d.swapped) {
        for (const auto& [key, rec] : d.records) {
            if (key.pol != Polarization::PP) {
                throw InputError("reciprocity_swap: only PP records are supported");
            }
            int p, q;
            layout.emitter_pq(key.emitter_id, p, q);
            for (const auto& row : rec.rows) {
                const int s = slot_of(receiver_azimuth_3d(layout, p, row.receiver_id));
                insert_row(out, {s, key.freq_id, key.pol},
                           {key.emitter_id + 1, row.incident, row.total}, 0);
            }
        }
    } else {
        // Undo: rows point at former emitters; recover the receiver index
        // from the slot azimuth relative to that emitter's azimuth.
        for (const auto& [key, rec] : d.records) {
            const double slot_az = slots.at(key.emitter_id);
            for (const auto& row : rec.rows) {
                int p, q;
                layout.emitter_pq(row.receiver_id - 1, p, q);
                const double offset = slot_az - layout.emitter_azimuths_deg[p - 1];
                const int j = match_angle(layout.receiver_offsets_deg, offset, 1e-6);
                if (j < 0) throw NumericalError("reciprocity_swap: cannot invert slot offset");
                insert_row(out, {row.receiver_id - 1, key.freq_id, key.pol},
                           {j + 1, row.incident, row.total}, 0);
            }
        }
        for (auto& [key, rec] : out.records) {
            std::sort(rec.rows.begin(), rec.rows.end(),
                      [](const SampleRow& a, const SampleRow& b) {
                          return a.receiver_id < b.receiver_id;
                      });
        }
    }
    return out;
}

int ValidationReport::count(IssueKind k) const {
    int n = 0;
    for (const auto& i : issues) {
        if (i.kind == k) ++n;
    }
    return n;
}

ValidationReport validate(const Dataset& d) {
    ValidationReport rep;

    // Expected record keys and per-record receiver counts.
    std::vector<Polarization> pols;
    for (const auto& [key, rec] : d.records) {
        if (std::find(pols.begin(), pols.end(), key.pol) == pols.end()) pols.push_back(key.pol);
    }
    if (pols.empty()) pols.push_back(d.dim == 2 ? Polarization::None : Polarization::PP);

    int n_emitters;
    auto expected_rows = [&](int emitter_id) {
        if (d.dim == 2) return d.layout2d.receiver_count();
        if (!d.swapped) return d.layout3d.receiver_count();
        const std::vector<double> slots = reciprocity_slots(d.layout3d);
        int n = 0;
        for (int p = 1; p <= d.layout3d.azimuth_count(); ++p) {
            for (int j = 1; j <= d.layout3d.receiver_count(); ++j) {
                if (circular_gap_deg(receiver_azimuth_3d(d.layout3d, p, j),
                                     slots.at(emitter_id)) < 1e-6) {
                    n += d.layout3d.altitude_count();
                    break;
                }
            }
        }
        return n;
    };
    if (d.dim == 2) {
        n_emitters = d.layout2d.emitter_count();
    } else if (!d.swapped) {
        n_emitters = d.layout3d.emitter_count();
    } else {
        n_emitters = (int)reciprocity_slots(d.layout3d).size();
    }

    for (int e = 0; e < n_emitters; ++e) {
        for (int k = 0; k < d.sweep.count(); ++k) {
            for (Polarization pol : pols) {
                const RecordKey key{e, k, pol};
                auto it = d.records.find(key);
                if (it == d.records.end()) {
                    rep.issues.push_back({IssueKind::MissingPair, key, 0,
                                          "missing (emitter, frequency) pair"});
                } else if ((int)it->second.rows.size() != expected_rows(e)) {
                    rep.issues.push_back(
                        {IssueKind::IncompleteReceivers, key, 0,
                         "record has " + std::to_string(it->second.rows.size()) +
                             " rows, expected " + std::to_string(expected_rows(e))});
                }
            }
        }
    }

    // Non-finite samples.
    auto finite = [](Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); };
    for (const auto& [key, rec] : d.records) {
        for (const auto& row : rec.rows) {
            if (!finite(row.incident) || !finite(row.total)) {
                rep.issues.push_back(
                    {IssueKind::NonFinite, key, row.receiver_id, "non-finite sample"});
            }
        }
    }

    // Amplitude outliers: > 10x the per-frequency median magnitude, incident
    // and total streams judged separately.
    for (int k = 0; k < d.sweep.count(); ++k) {
        for (int stream = 0; stream < 2; ++stream) {
            std::vector<double> mags;
            for (const auto& [key, rec] : d.records) {
                if (key.freq_id != k) continue;
                for (const auto& row : rec.rows) {
                    const Complex z = stream == 0 ? row.incident : row.total;
                    if (finite(z)) mags.push_back(std::abs(z));
                }
            }
            if (mags.size() < 3) continue;
            std::sort(mags.begin(), mags.end());
            const double median = mags[mags.size() / 2];
            if (median <= 0.0) continue;
            for (const auto& [key, rec] : d.records) {
                if (key.freq_id != k) continue;
                for (const auto& row : rec.rows) {
                    const Complex z = stream == 0 ? row.incident : row.total;
                    if (finite(z) && std::abs(z) > 10.0 * median) {
                        rep.issues.push_back({IssueKind::Outlier, key, row.receiver_id,
                                              std::string(stream == 0 ? "incident" : "total") +
                                                  " amplitude exceeds 10x median"});
                    }
                }
            }
        }
    }
    return rep;
}

std::uint32_t crc32_bytes(const void* data, std::size_t size) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t crc = 0xFFFFFFFFu;
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) crc = table[(crc ^ p[i]) & 0xFFu] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

namespace {

std::string list_to_text(const std::vector<double>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ' ';
        s += fmt_double(v[i]);
    }
    return s;
}

std::vector<double> text_to_list(std::string_view s) {
    std::vector<double> v;
    for (auto f : split_fields(s)) v.push_back(parse_double(f));
    return v;
}

}  // namespace

void write_canonical(const Dataset& d, std::ostream& out) {
    out << "#topoimg-dataset v1\n";
    out << "#dimension\t" << d.dim << '\n';
    out << "#convention\t" << (d.convention == TimeConvention::NegIOmegaT ? "e-iwt" : "e+iwt")
        << '\n';
    out << "#swapped\t" << (d.swapped ? 1 : 0) << '\n';
    if (d.dim == 2) {
        out << "#layout2d.emitter_radius\t" << fmt_double(d.layout2d.emitter_radius) << '\n';
        out << "#layout2d.receiver_radius\t" << fmt_double(d.layout2d.receiver_radius) << '\n';
        out << "#layout2d.emitter_azimuths\t" << list_to_text(d.layout2d.emitter_azimuths_deg)
            << '\n';
        out << "#layout2d.receiver_offsets\t" << list_to_text(d.layout2d.receiver_offsets_deg)
            << '\n';
    } else {
        out << "#layout3d.sphere_radius\t" << fmt_double(d.layout3d.sphere_radius) << '\n';
        out << "#layout3d.emitter_azimuths\t" << list_to_text(d.layout3d.emitter_azimuths_deg)
            << '\n';
        out << "#layout3d.emitter_altitudes\t" << list_to_text(d.layout3d.emitter_altitudes_deg)
            << '\n';
        out << "#layout3d.receiver_offsets\t" << list_to_text(d.layout3d.receiver_offsets_deg)
            << '\n';
        out << "#layout3d.receiver_altitude\t" << fmt_double(d.layout3d.receiver_altitude_deg)
            << '\n';
    }
    out << "#frequencies_hz\t" << list_to_text(d.sweep.values_hz) << '\n';
    for (const auto& [k, v] : d.metadata) out << "#meta." << k << '\t' << v << '\n';

    std::string body;
    for (const auto& [key, rec] : d.records) {
        for (const auto& row : rec.rows) {
            body += std::to_string(key.emitter_id);
            body += '\t';
            body += std::to_string(key.freq_id);
            body += '\t';
            body += std::to_string(row.receiver_id);
            body += '\t';
            body += pol_token(key.pol);
            body += '\t';
            body += fmt_double(row.incident.real());
            body += '\t';
            body += fmt_double(row.incident.imag());
            body += '\t';
            body += fmt_double(row.total.real());
            body += '\t';
            body += fmt_double(row.total.imag());
            body += '\n';
        }
    }
    out << body;
    char hex[9];
    std::snprintf(hex, sizeof(hex), "%08x", crc32_bytes(body.data(), body.size()));
    out << "#crc32 " << hex << '\n';
}

Dataset read_canonical(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "#topoimg-dataset v1") {
        throw InputError("canonical dataset: version mismatch or bad magic line");
    }

    Dataset d;
    std::string body;
    bool have_crc = false;
    std::uint32_t want_crc = 0;

    auto header_kv = [&](std::string_view l, std::string& key, std::string& value) {
        const size_t tab = l.find('\t');
        if (tab == std::string_view::npos) throw InputError("canonical header without tab: " +
                                                            std::string(l));
        key = std::string(l.substr(1, tab - 1));
        value = std::string(l.substr(tab + 1));
    };

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.rfind("#crc32 ", 0) == 0) {
            want_crc = (std::uint32_t)std::stoul(line.substr(7), nullptr, 16);
            have_crc = true;
            break;
        }
        if (!line.empty() && line[0] == '#') {
            std::string key, value;
            header_kv(line, key, value);
            if (key == "dimension") {
                d.dim = (int)parse_long(value);
            } else if (key == "convention") {
                if (value == "e-iwt") {
                    d.convention = TimeConvention::NegIOmegaT;
                } else if (value == "e+iwt") {
                    d.convention = TimeConvention::PosIOmegaT;
                } else {
                    throw InputError("canonical dataset: bad convention '" + value + "'");
                }
            } else if (key == "swapped") {
                d.swapped = parse_long(value) != 0;
            } else if (key == "layout2d.emitter_radius") {
                d.layout2d.emitter_radius = parse_double(value);
            } else if (key == "layout2d.receiver_radius") {
                d.layout2d.receiver_radius = parse_double(value);
            } else if (key == "layout2d.emitter_azimuths") {
                d.layout2d.emitter_azimuths_deg = text_to_list(value);
            } else if (key == "layout2d.receiver_offsets") {
                d.layout2d.receiver_offsets_deg = text_to_list(value);
            } else if (key == "layout3d.sphere_radius") {
                d.layout3d.sphere_radius = parse_double(value);
            } else if (key == "layout3d.emitter_azimuths") {
                d.layout3d.emitter_azimuths_deg = text_to_list(value);
            } else if (key == "layout3d.emitter_altitudes") {
                d.layout3d.emitter_altitudes_deg = text_to_list(value);
            } else if (key == "layout3d.receiver_offsets") {
                d.layout3d.receiver_offsets_deg = text_to_list(value);
            } else if (key == "layout3d.receiver_altitude") {
                d.layout3d.receiver_altitude_deg = parse_double(value);
            } else if (key == "frequencies_hz") {
                d.sweep.values_hz = text_to_list(value);
            } else if (key.rfind("meta.", 0) == 0) {
                d.metadata[key.substr(5)] = value;
            } else {
                throw InputError("canonical dataset: unknown header key '" + key + "'");
            }
            continue;
        }
        body += line;
        body += '\n';
    }
    if (!have_crc) throw InputError("canonical dataset: checksum line missing (truncated?)");
    if (crc32_bytes(body.data(), body.size()) != want_crc) {
        throw InputError("canonical dataset: checksum mismatch");
    }

    std::istringstream bs(body);
    long line_no = 0;
    while (std::getline(bs, line)) {
        ++line_no;
        const auto f = split_fields(line);
        if (f.empty()) continue;
        if (f.size() != 8) {
            throw InputError("canonical body line " + std::to_string(line_no) +
                             ": expected 8 fields");
        }
        const RecordKey key{(int)parse_long(f[0]), (int)parse_long(f[1]), parse_pol(f[3])};
        insert_row(d, key,
                   {(int)parse_long(f[2]), Complex(parse_double(f[4]), parse_double(f[5])),
                    Complex(parse_double(f[6]), parse_double(f[7]))},
                   line_no);
    }
    return d;
}

void write_canonical_file(const Dataset& d, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open for writing: " + path);
    write_canonical(d, out);
}

Dataset read_canonical_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open for reading: " + path);
    return read_canonical(in);
}

}  // namespace topoimg
