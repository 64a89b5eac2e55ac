#pragma once

#include "rcshrink/analysis.hpp"
#include "rcshrink/denoise.hpp"
#include "rcshrink/dwt.hpp"
#include "rcshrink/errors.hpp"
#include "rcshrink/normal.hpp"
#include "rcshrink/policies.hpp"
#include "rcshrink/quadrature.hpp"
#include "rcshrink/report.hpp"
#include "rcshrink/rules.hpp"
#include "rcshrink/signals.hpp"
#include "rcshrink/stats.hpp"
