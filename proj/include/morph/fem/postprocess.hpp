#pragma once

#include "morph/fem/material.hpp"
#include "morph/fem/mesh.hpp"

namespace morph::fem {

/// Cauchy von Mises stress per node: each element evaluates the stress at
/// its corners and nodes average over the elements that share them.
/// Inadmissible corner states (J <= 0) throw InadmissibleStateError.
VecX nodal_von_mises(const Mesh& mesh, const MaterialLaw& law, const NodalField& u);

}  // namespace morph::fem
