#pragma once

// Umbrella header for the cone-beam perspective-deformation toolkit.

#include "xpd/analysis.hpp"
#include "xpd/core.hpp"
#include "xpd/dataset.hpp"
#include "xpd/geometry.hpp"
#include "xpd/image.hpp"
#include "xpd/io.hpp"
#include "xpd/metrics.hpp"
#include "xpd/phantom.hpp"
#include "xpd/presets.hpp"
#include "xpd/projector.hpp"
#include "xpd/resample.hpp"
#include "xpd/views.hpp"
