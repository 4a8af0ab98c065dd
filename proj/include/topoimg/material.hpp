#ifndef TOPOIMG_MATERIAL_HPP
#define TOPOIMG_MATERIAL_HPP

#include "topoimg/types.hpp"

namespace topoimg {

enum class MaterialKind { Dielectric, Conducting };

struct MaterialSpec {
    MaterialKind kind = MaterialKind::Dielectric;
    double epsilon = 3.0;  // relative permittivity; meaningful for dielectric only

    static MaterialSpec dielectric(double eps) {
        if (!(eps > 0.0)) throw InputError("dielectric permittivity must be > 0");
        return {MaterialKind::Dielectric, eps};
    }
    static MaterialSpec conducting() { return {MaterialKind::Conducting, 0.0}; }
};

}  // namespace topoimg

#endif
