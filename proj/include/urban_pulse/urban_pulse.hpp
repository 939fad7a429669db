#pragma once

// Convenience header for the analysis pipeline. The HTTP binding
// (service_http.hpp) is kept separate so it is only pulled in on demand.

#include "catalog.hpp"
#include "dataset.hpp"
#include "density.hpp"
#include "digest.hpp"
#include "error.hpp"
#include "field_io.hpp"
#include "geo.hpp"
#include "mesh.hpp"
#include "points.hpp"
#include "pulse.hpp"
#include "region.hpp"
#include "service.hpp"
#include "synthetic.hpp"
#include "temporal.hpp"
#include "topology.hpp"
