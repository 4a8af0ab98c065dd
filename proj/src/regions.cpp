#include "topoimg/regions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>

#include <nlohmann/json.hpp>

#include "topoimg/textio.hpp"

namespace topoimg {

long RegionMask::count() const {
    long n = 0;
    for (char c : membership) n += (c != 0);
    return n;
}

RegionMask extract(const ScalarGrid& field, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw InputError("extract: lambda must lie in [0,1]");
    }
    RegionMask mask;
    mask.grid = field.grid;
    mask.lambda = lambda;
    mask.membership.assign(field.values.size(), 0);

    if (field.kind == FieldKind::TD) {
        const double mn = field.min();
        if (!(mn < 0.0)) {
            throw NumericalError("extract: no negative values - nothing to reconstruct");
        }
        mask.mode = ThresholdMode::MinSide;
        mask.extremum = mn;
        const double threshold = lambda * mn;
        for (size_t i = 0; i < field.values.size(); ++i) {
            mask.membership[i] = field.values[i] <= threshold;
        }
    } else {
        const double mx = field.max();
        if (!(mx > 0.0)) {
            throw NumericalError("extract: no positive values - nothing to reconstruct");
        }
        mask.mode = ThresholdMode::MaxSide;
        mask.extremum = mx;
        const double threshold = lambda * mx;
        for (size_t i = 0; i < field.values.size(); ++i) {
            mask.membership[i] = field.values[i] >= threshold;
        }
    }
    return mask;
}

std::vector<char> rasterize(const ShapeTruth& truth, const InspectionGrid& grid) {
    std::vector<char> out(grid.node_count(), 0);
    for (long idx = 0; idx < grid.node_count(); ++idx) {
        const Vec3 p = (grid.dim == 3) ? grid.point3(idx) : Vec3{grid.point2(idx).x,
                                                                 grid.point2(idx).y, 0.0};
        for (const auto& s : truth.shapes) {
            bool inside = false;
            switch (s.type) {
                case ShapePrimitive::Type::Disk: {
                    const double dx = p.x - s.center.x, dy = p.y - s.center.y;
                    const double dz = (grid.dim == 3) ? p.z - s.center.z : 0.0;
                    inside = dx * dx + dy * dy + dz * dz <= s.radius * s.radius;
                    break;
                }
                case ShapePrimitive::Type::Box:
                    inside = std::abs(p.x - s.center.x) <= s.extent.x &&
                             std::abs(p.y - s.center.y) <= s.extent.y &&
                             (grid.dim == 2 || std::abs(p.z - s.center.z) <= s.extent.z);
                    break;
                case ShapePrimitive::Type::Point: {
                    // Marks the single cell containing the point.
                    inside = std::abs(p.x - s.center.x) <= grid.step(0) / 2 &&
                             std::abs(p.y - s.center.y) <= grid.step(1) / 2 &&
                             (grid.dim == 2 || std::abs(p.z - s.center.z) <= grid.step(2) / 2);
                    break;
                }
            }
            if (inside) {
                out[idx] = 1;
                break;
            }
        }
    }
    return out;
}

namespace {

// Flood fill writing a component label per member node; returns the count.
int label_components(const RegionMask& mask, std::vector<int>& label) {
    const auto& g = mask.grid;
    label.assign(mask.membership.size(), -1);
    int components = 0;
    for (long start = 0; start < (long)mask.membership.size(); ++start) {
        if (!mask.membership[start] || label[start] >= 0) continue;
        const int id = components++;
        std::queue<long> queue;
        queue.push(start);
        label[start] = id;
        while (!queue.empty()) {
            const long idx = queue.front();
            queue.pop();
            int ix, iy, iz;
            g.unflatten(idx, ix, iy, iz);
            const int deltas[6][3] = {{1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                                      {0, -1, 0}, {0, 0, 1},  {0, 0, -1}};
            const int n_dirs = (g.dim == 3) ? 6 : 4;
            for (int d = 0; d < n_dirs; ++d) {
                const int jx = ix + deltas[d][0];
                const int jy = iy + deltas[d][1];
                const int jz = iz + deltas[d][2];
                if (jx < 0 || jx >= g.res[0] || jy < 0 || jy >= g.res[1] || jz < 0 ||
                    jz >= (g.dim == 3 ? g.res[2] : 1)) {
                    continue;
                }
                const long jdx = g.flat_index(jx, jy, jz);
                if (mask.membership[jdx] && label[jdx] < 0) {
                    label[jdx] = id;
                    queue.push(jdx);
                }
            }
        }
    }
    return components;
}

int component_count(const RegionMask& mask) {
    std::vector<int> label;
    return label_components(mask, label);
}

Vec3 centroid_of(const std::vector<char>& member, const InspectionGrid& grid) {
    Vec3 c;
    long n = 0;
    for (long idx = 0; idx < (long)member.size(); ++idx) {
        if (!member[idx]) continue;
        const Vec3 p = (grid.dim == 3) ? grid.point3(idx) : Vec3{grid.point2(idx).x,
                                                                 grid.point2(idx).y, 0.0};
        c = c + p;
        ++n;
    }
    return n ? c * (1.0 / n) : c;
}

}  // namespace

RegionMetrics score(const RegionMask& mask, const ShapeTruth& truth) {
    if (mask.count() == 0) throw InputError("score: empty mask");
    const std::vector<char> t = rasterize(truth, mask.grid);

    long inter = 0, uni = 0;
    for (size_t i = 0; i < t.size(); ++i) {
        const bool a = mask.membership[i], b = t[i];
        inter += a && b;
        uni += a || b;
    }

    RegionMetrics m;
    m.jaccard = uni ? (double)inter / (double)uni : 0.0;
    m.mask_centroid = centroid_of(mask.membership, mask.grid);
    m.truth_centroid = centroid_of(t, mask.grid);
    m.centroid_offset = (m.mask_centroid - m.truth_centroid).norm();
    m.components = component_count(mask);
    m.measure = (double)mask.count() * mask.grid.cell_measure();
    return m;
}

RegionMask prune_small_components(const RegionMask& mask, long min_cells) {
    std::vector<int> label;
    const int n = label_components(mask, label);
    std::vector<long> size(n, 0);
    for (int l : label) {
        if (l >= 0) ++size[l];
    }
    RegionMask out = mask;
    for (size_t i = 0; i < out.membership.size(); ++i) {
        if (label[i] >= 0 && size[label[i]] < min_cells) out.membership[i] = 0;
    }
    return out;
}

void write_mask_csv(const RegionMask& mask, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open for writing: " + path);
    const int dim = mask.grid.dim;
    out << "# topoimg-mask v1\n";
    out << "# dim " << dim << '\n';
    out << "# lo";
    for (int a = 0; a < dim; ++a) out << ' ' << fmt_double(mask.grid.lo[a]);
    out << "\n# hi";
    for (int a = 0; a < dim; ++a) out << ' ' << fmt_double(mask.grid.hi[a]);
    out << "\n# res";
    for (int a = 0; a < dim; ++a) out << ' ' << mask.grid.res[a];
    out << "\n# lambda " << fmt_double(mask.lambda) << '\n';
    out << "# mode " << (mask.mode == ThresholdMode::MinSide ? "min-side" : "max-side") << '\n';
    out << "# extremum " << fmt_double(mask.extremum) << '\n';
    out << (dim == 3 ? "ix,iy,iz,x,y,z\n" : "ix,iy,x,y\n");
    for (long idx = 0; idx < (long)mask.membership.size(); ++idx) {
        if (!mask.membership[idx]) continue;
        int ix, iy, iz;
        mask.grid.unflatten(idx, ix, iy, iz);
        if (dim == 3) {
            const Vec3 p = mask.grid.point3(idx);
            out << ix << ',' << iy << ',' << iz << ',' << fmt_double(p.x) << ','
                << fmt_double(p.y) << ',' << fmt_double(p.z) << '\n';
        } else {
            const Vec2 p = mask.grid.point2(idx);
            out << ix << ',' << iy << ',' << fmt_double(p.x) << ',' << fmt_double(p.y) << '\n';
        }
    }
}

RegionMask read_mask_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open for reading: " + path);
    RegionMask mask;
    std::string line;
    if (!std::getline(in, line) || line != "# topoimg-mask v1") {
        throw InputError("mask file: bad magic line in " + path);
    }
    bool have_grid = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] != '#') {
            if (line.rfind("ix,", 0) == 0) {  // column header
                have_grid = true;
                break;
            }
            throw InputError("mask file: unexpected line before header end: " + line);
        }
        const auto f = split_fields(std::string_view(line).substr(1));
        if (f.empty()) continue;
        if (f[0] == "dim") {
            mask.grid.dim = (int)parse_long(f.at(1));
            if (mask.grid.dim == 2) {
                mask.grid.res[2] = 1;
                mask.grid.lo[2] = mask.grid.hi[2] = 0.0;
            }
        } else if (f[0] == "lo") {
            for (int a = 0; a + 1 < (int)f.size(); ++a) mask.grid.lo[a] = parse_double(f[a + 1]);
        } else if (f[0] == "hi") {
            for (int a = 0; a + 1 < (int)f.size(); ++a) mask.grid.hi[a] = parse_double(f[a + 1]);
        } else if (f[0] == "res") {
            for (int a = 0; a + 1 < (int)f.size(); ++a) {
                mask.grid.res[a] = (int)parse_long(f[a + 1]);
            }
        } else if (f[0] == "lambda") {
            mask.lambda = parse_double(f.at(1));
        } else if (f[0] == "mode") {
            mask.mode = (f.at(1) == "min-side") ? ThresholdMode::MinSide : ThresholdMode::MaxSide;
        } else if (f[0] == "extremum") {
            mask.extremum = parse_double(f.at(1));
        }
    }
    if (!have_grid) throw InputError("mask file: missing column header in " + path);
    mask.grid.validate();
    mask.membership.assign(mask.grid.node_count(), 0);
    while (std::getline(in, line)) {
        const auto f = split_fields(line);
        if (f.empty()) continue;
        const int ix = (int)parse_long(f.at(0));
        const int iy = (int)parse_long(f.at(1));
        const int iz = (mask.grid.dim == 3) ? (int)parse_long(f.at(2)) : 0;
        mask.membership.at(mask.grid.flat_index(ix, iy, iz)) = 1;
    }
    return mask;
}

void write_metrics_json(const RegionMetrics& m, const std::string& path) {
    nlohmann::json j;
    j["jaccard"] = m.jaccard;
    j["mask_centroid_m"] = {m.mask_centroid.x, m.mask_centroid.y, m.mask_centroid.z};
    j["truth_centroid_m"] = {m.truth_centroid.x, m.truth_centroid.y, m.truth_centroid.z};
    j["centroid_offset_m"] = m.centroid_offset;
    j["components"] = m.components;
    j["measure"] = m.measure;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
}

void write_truth_json(const ShapeTruth& t, const std::string& path) {
    nlohmann::json shapes = nlohmann::json::array();
    for (const auto& s : t.shapes) {
        nlohmann::json js;
        switch (s.type) {
            case ShapePrimitive::Type::Disk:
                js["type"] = "disk";
                js["center"] = {s.center.x, s.center.y};
                js["radius"] = s.radius;
                break;
            case ShapePrimitive::Type::Box:
                js["type"] = "box";
                js["center"] = {s.center.x, s.center.y, s.center.z};
                js["extent"] = {s.extent.x, s.extent.y, s.extent.z};
                break;
            case ShapePrimitive::Type::Point:
                js["type"] = "point";
                js["center"] = {s.center.x, s.center.y, s.center.z};
                break;
        }
        if (!s.material.empty()) js["material"] = s.material;
        shapes.push_back(js);
    }
    nlohmann::json j;
    j["shapes"] = shapes;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
}

ShapeTruth read_truth_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open for reading: " + path);
    nlohmann::json j;
    in >> j;
    ShapeTruth t;
    for (const auto& js : j.at("shapes")) {
        ShapePrimitive s;
        const std::string type = js.at("type");
        const auto& c = js.at("center");
        if (type == "disk") {
            s.type = ShapePrimitive::Type::Disk;
            s.center = {c.at(0), c.at(1), 0.0};
            s.radius = js.at("radius");
        } else if (type == "box") {
            s.type = ShapePrimitive::Type::Box;
            s.center = {c.at(0), c.at(1), c.size() > 2 ? (double)c.at(2) : 0.0};
            const auto& e = js.at("extent");
            s.extent = {e.at(0), e.at(1), e.size() > 2 ? (double)e.at(2) : 0.0};
        } else if (type == "point") {
            s.type = ShapePrimitive::Type::Point;
            s.center = {c.at(0), c.at(1), c.size() > 2 ? (double)c.at(2) : 0.0};
        } else {
            throw InputError("unknown truth shape type: " + type);
        }
        if (js.contains("material")) s.material = js.at("material");
        t.shapes.push_back(s);
    }
    return t;
}

}  // namespace topoimg
