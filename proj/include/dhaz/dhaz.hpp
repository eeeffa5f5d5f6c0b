#ifndef DHAZ_DHAZ_HPP
#define DHAZ_DHAZ_HPP

#include "dhaz/additive.hpp"
#include "dhaz/bspline.hpp"
#include "dhaz/csv.hpp"
#include "dhaz/data.hpp"
#include "dhaz/design.hpp"
#include "dhaz/diagnostics.hpp"
#include "dhaz/formula.hpp"
#include "dhaz/glm.hpp"
#include "dhaz/irls.hpp"
#include "dhaz/simulate.hpp"
#include "dhaz/tree.hpp"

namespace dhaz {
inline constexpr const char* kVersion = "0.1.0";
}

#endif
