#pragma once

#include "semfactor/embedding.hpp"
#include "semfactor/validation.hpp"

namespace semfactor::fixtures {

/// Bundled default concept list: 234 single-word occupations covering the
/// vertical and horizontal spread of the occupational space.
const embedding::ConceptSet& occupations();

/// Bundled partial ISEI (International Socio-Economic Index) scale covering
/// the occupations with published index values in our reference tables. A
/// user-supplied CSV replaces it for full-coverage runs.
const validation::ExternalScale& isei_partial();

}  // namespace semfactor::fixtures
