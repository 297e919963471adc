#pragma once

#include "eforensics/digits.hpp"
#include "eforensics/error.hpp"
#include "eforensics/estimate.hpp"
#include "eforensics/ingest.hpp"
#include "eforensics/json_io.hpp"
#include "eforensics/model.hpp"
#include "eforensics/plots.hpp"
#include "eforensics/report.hpp"
#include "eforensics/rng.hpp"
#include "eforensics/stats.hpp"
#include "eforensics/synth.hpp"
#include "eforensics/zeta.hpp"
#include "eforensics/zscore.hpp"
