#pragma once
// Convenience umbrella for the whole computational library.  The command-line
// layer (cli.hpp) is not included here; it depends on the vendored CLI11 and
// json single headers.

#include "casimir.hpp"
#include "core.hpp"
#include "geometry.hpp"
#include "linalg.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "scattering.hpp"
#include "specfun.hpp"
#include "unwrap.hpp"
