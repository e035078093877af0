#pragma once

#include "itecal/domain.hpp"
#include "itecal/error.hpp"
#include "itecal/inference.hpp"
#include "itecal/ite_calib.hpp"
#include "itecal/philox.hpp"
#include "itecal/risk_calib.hpp"
#include "itecal/simulation.hpp"
#include "itecal/io/assess.hpp"
#include "itecal/io/dataset.hpp"
#include "itecal/io/report.hpp"
#include "itecal/io/svg.hpp"
