#pragma once

#include "plcmon/forecasting/arima.hpp"
#include "plcmon/forecasting/ffnn.hpp"
#include "plcmon/forecasting/l2boost.hpp"
#include "plcmon/forecasting/lstm.hpp"
#include "plcmon/forecasting/model_io.hpp"
#include "plcmon/forecasting/neural.hpp"
#include "plcmon/forecasting/predictor.hpp"
#include "plcmon/forecasting/simple.hpp"
