#pragma once

#include "qcal/config.hpp"
#include "qcal/data_io.hpp"
#include "qcal/error.hpp"
#include "qcal/inference.hpp"
#include "qcal/kernels.hpp"
#include "qcal/likelihood.hpp"
#include "qcal/linalg.hpp"
#include "qcal/pipeline.hpp"
#include "qcal/predict.hpp"
#include "qcal/qudit_model.hpp"
#include "qcal/ramsey.hpp"
#include "qcal/units.hpp"
