#pragma once

#include "uwsr/assembly.hpp"
#include "uwsr/basis.hpp"
#include "uwsr/cloud.hpp"
#include "uwsr/divfree.hpp"
#include "uwsr/errors.hpp"
#include "uwsr/io.hpp"
#include "uwsr/isosurface.hpp"
#include "uwsr/metrics.hpp"
#include "uwsr/mollifier.hpp"
#include "uwsr/orientation.hpp"
#include "uwsr/pipeline.hpp"
#include "uwsr/shapes.hpp"
#include "uwsr/solver.hpp"
#include "uwsr/wavelet.hpp"
