#ifndef TOPOIMG_DATASET_HPP
#define TOPOIMG_DATASET_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "topoimg/geometry.hpp"
#include "topoimg/types.hpp"

namespace topoimg {

enum class Polarization { None, PP, TP };
enum class TimeConvention { NegIOmegaT, PosIOmegaT };  // e^{-iwt} / e^{+iwt}

struct SampleRow {
    int receiver_id = 0;  // 1-based receiver index (old-emitter id + 1 when swapped)
    Complex incident{0.0, 0.0};
    Complex total{0.0, 0.0};

    bool operator==(const SampleRow&) const = default;
};

struct RecordKey {
    int emitter_id = 0;  // 0-based; equatorial slot index when swapped
    int freq_id = 0;
    Polarization pol = Polarization::None;

    auto operator<=>(const RecordKey&) const = default;
};

struct ExperimentRecord {
    RecordKey key;
    std::vector<SampleRow> rows;

    bool operator==(const ExperimentRecord&) const = default;
};

struct Dataset {
    int dim = 2;
    Layout2D layout2d;
    Layout3D layout3d;
    FrequencySweep sweep;
    TimeConvention convention = TimeConvention::NegIOmegaT;
    // After reciprocity_swap: emitter ids index equatorial azimuth slots and
    // rows point back at former emitters.
    bool swapped = false;
    std::map<RecordKey, ExperimentRecord> records;
    std::map<std::string, std::string> metadata;

    const ExperimentRecord& record(const RecordKey& key) const;
    bool operator==(const Dataset&) const = default;
};

enum class ColumnRole {
    EmitterAngleDeg,
    EmitterAltitudeDeg,
    ReceiverAngleDeg,
    FrequencyGhz,
    TotalRe,
    TotalIm,
    IncidentRe,
    IncidentIm,
    Skip,
};

// Describes the columns of a measurement text file. Shipped presets are
// best-effort guesses for the original experiment files, whose exact layout
// is not documented; everything is overridable.
struct ColumnMapping {
    std::string comment_prefix = "#";
    std::vector<ColumnRole> roles;
    double angle_tolerance_deg = 2.0;
    // Receiver angles either absolute azimuths or offsets from the emitter.
    bool receiver_angle_is_offset = false;
    TimeConvention convention = TimeConvention::PosIOmegaT;
    Polarization polarization = Polarization::None;

    static ColumnMapping fresnel2d();
    static ColumnMapping fresnel3d(Polarization pol);
    static ColumnMapping by_name(const std::string& name);

    void validate(int dim) const;
};

Dataset parse_columnar(std::istream& in, const ColumnMapping& mapping, const Layout2D& layout,
                       const FrequencySweep& sweep);
Dataset parse_columnar(std::istream& in, const ColumnMapping& mapping, const Layout3D& layout,
                       const FrequencySweep& sweep);

// Conjugates every sample if the dataset is stored in the e^{+iwt}
// convention; identity otherwise. All downstream math assumes e^{-iwt}.
Dataset to_working_convention(const Dataset& d);

// Re-keys a 3D PP dataset so former receivers emit (polarized along k) and
// former emitters measure along their u_phi direction. Sample values carry
// over unchanged by Maxwell reciprocity. Applying it twice recovers a
// dataset isomorphic to the original.
Dataset reciprocity_swap(const Dataset& d);

// Absolute equatorial azimuths (degrees) that act as emitters after the
// swap, sorted ascending; slot i is emitter_id i of the swapped dataset.
std::vector<double> reciprocity_slots(const Layout3D& layout);

enum class IssueKind { MissingPair, IncompleteReceivers, NonFinite, Outlier };

struct Issue {
    IssueKind kind;
    RecordKey key;
    int receiver_id = 0;  // 0 when not sample-specific
    std::string message;
};

struct ValidationReport {
    std::vector<Issue> issues;
    bool clean() const { return issues.empty(); }
    int count(IssueKind k) const;
};

ValidationReport validate(const Dataset& d);

// Canonical interchange container: '#key<TAB>value' header, TSV body
// 'emitter freq recv pol inc_re inc_im tot_re tot_im', trailing
// '#crc32 <hex>' over the body bytes. Floats use shortest round-trip
// decimals, so write/read is bit-exact.
void write_canonical(const Dataset& d, std::ostream& out);
Dataset read_canonical(std::istream& in);
void write_canonical_file(const Dataset& d, const std::string& path);
Dataset read_canonical_file(const std::string& path);

std::uint32_t crc32_bytes(const void* data, std::size_t size);

}  // namespace topoimg

#endif
