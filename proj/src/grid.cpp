#include "topoimg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "topoimg/textio.hpp"

namespace topoimg {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == ',' ||
                                   line[i] == '\r')) {
            ++i;
        }
        size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != ',' &&
               line[j] != '\r') {
            ++j;
        }
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

InspectionGrid InspectionGrid::square(double half_extent, int n) {
    InspectionGrid g;
    g.dim = 2;
    g.lo = {-half_extent, -half_extent, 0.0};
    g.hi = {half_extent, half_extent, 0.0};
    g.res = {n, n, 1};
    return g;
}

InspectionGrid InspectionGrid::cube(double half_extent, int n) {
    InspectionGrid g;
    g.dim = 3;
    g.lo = {-half_extent, -half_extent, -half_extent};
    g.hi = {half_extent, half_extent, half_extent};
    g.res = {n, n, n};
    return g;
}

void InspectionGrid::validate() const {
    if (dim != 2 && dim != 3) throw InputError("InspectionGrid: dim must be 2 or 3");
    for (int a = 0; a < dim; ++a) {
        if (res[a] < 2) throw InputError("InspectionGrid: resolution must be >= 2 per axis");
        if (!(hi[a] > lo[a])) throw InputError("InspectionGrid: degenerate bounds");
    }
    if (dim == 2 && res[2] != 1) throw InputError("InspectionGrid: 2D grid needs res[2] == 1");
}

long InspectionGrid::node_count() const {
    return (long)res[0] * res[1] * (dim == 3 ? res[2] : 1);
}

void InspectionGrid::unflatten(long idx, int& ix, int& iy, int& iz) const {
    ix = (int)(idx % res[0]);
    iy = (int)((idx / res[0]) % res[1]);
    iz = (int)(idx / ((long)res[0] * res[1]));
}

Vec2 InspectionGrid::point2(long idx) const {
    int ix, iy, iz;
    unflatten(idx, ix, iy, iz);
    return {coord(0, ix), coord(1, iy)};
}

Vec3 InspectionGrid::point3(long idx) const {
    int ix, iy, iz;
    unflatten(idx, ix, iy, iz);
    return {coord(0, ix), coord(1, iy), coord(2, iz)};
}

double InspectionGrid::cell_measure() const {
    double m = step(0) * step(1);
    if (dim == 3) m *= step(2);
    return m;
}

double ScalarGrid::min() const { return *std::min_element(values.begin(), values.end()); }
double ScalarGrid::max() const { return *std::max_element(values.begin(), values.end()); }

long ScalarGrid::argmin() const {
    return std::min_element(values.begin(), values.end()) - values.begin();
}

long ScalarGrid::argmax() const {
    return std::max_element(values.begin(), values.end()) - values.begin();
}

void write_grid_csv(const ScalarGrid& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open for writing: " + path);
    out << (g.grid.dim == 3 ? "x,y,z,value\n" : "x,y,value\n");
    for (long idx = 0; idx < g.grid.node_count(); ++idx) {
        if (g.grid.dim == 3) {
            const Vec3 p = g.grid.point3(idx);
            out << fmt_double(p.x) << ',' << fmt_double(p.y) << ',' << fmt_double(p.z) << ','
                << fmt_double(g.values[idx]) << '\n';
        } else {
            const Vec2 p = g.grid.point2(idx);
            out << fmt_double(p.x) << ',' << fmt_double(p.y) << ',' << fmt_double(g.values[idx])
                << '\n';
        }
    }
}

void write_grid_sidecar(const ScalarGrid& g, const std::string& path) {
    nlohmann::json j;
    j["kind"] = (g.kind == FieldKind::TD) ? "td" : "te";
    j["dim"] = g.grid.dim;
    j["bounds"]["lo"] = std::vector<double>(g.grid.lo.begin(), g.grid.lo.begin() + g.grid.dim);
    j["bounds"]["hi"] = std::vector<double>(g.grid.hi.begin(), g.grid.hi.begin() + g.grid.dim);
    j["resolution"] = std::vector<int>(g.grid.res.begin(), g.grid.res.begin() + g.grid.dim);
    j["extrema"]["min"] = g.min();
    j["extrema"]["max"] = g.max();
    int ix, iy, iz;
    g.grid.unflatten(g.argmin(), ix, iy, iz);
    j["extrema"]["argmin_node"] = (g.grid.dim == 3) ? std::vector<int>{ix, iy, iz}
                                                    : std::vector<int>{ix, iy};
    g.grid.unflatten(g.argmax(), ix, iy, iz);
    j["extrema"]["argmax_node"] = (g.grid.dim == 3) ? std::vector<int>{ix, iy, iz}
                                                    : std::vector<int>{ix, iy};
    j["colormap"] = {{"name", "blue-white-red"},
                     {"lo", g.min()},
                     {"hi", g.max()}};
    j["provenance"] = {{"emitters", g.provenance.emitters},
                       {"frequencies", g.provenance.frequencies},
                       {"dataset", g.provenance.dataset_id}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
}

namespace {

void colormap_bwr(double t, unsigned char rgb[3]) {
    t = std::clamp(t, 0.0, 1.0);
    if (t < 0.5) {
        const double u = t / 0.5;  // blue -> white
        rgb[0] = (unsigned char)std::lround(255.0 * u);
        rgb[1] = (unsigned char)std::lround(255.0 * u);
        rgb[2] = 255;
    } else {
        const double u = (t - 0.5) / 0.5;  // white -> red
        rgb[0] = 255;
        rgb[1] = (unsigned char)std::lround(255.0 * (1.0 - u));
        rgb[2] = (unsigned char)std::lround(255.0 * (1.0 - u));
    }
}

}  // namespace

void write_grid_ppm(const ScalarGrid& g, const std::string& path) {
    const int nx = g.grid.res[0], ny = g.grid.res[1];
    const int iz = (g.grid.dim == 3) ? g.grid.res[2] / 2 : 0;
    const double lo = g.min(), hi = g.max();
    const double span = (hi > lo) ? hi - lo : 1.0;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open for writing: " + path);
    out << "P6\n" << nx << ' ' << ny << "\n255\n";
    // Image rows top-down: row 0 is the largest y.
    for (int row = 0; row < ny; ++row) {
        const int iy = ny - 1 - row;
        for (int ix = 0; ix < nx; ++ix) {
            const double v = g.values[g.grid.flat_index(ix, iy, iz)];
            unsigned char rgb[3];
            colormap_bwr((v - lo) / span, rgb);
            out.write((const char*)rgb, 3);
        }
    }
}

}  // namespace topoimg
