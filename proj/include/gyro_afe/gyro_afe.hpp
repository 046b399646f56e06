#pragma once

#include "gyro_afe/analysis.hpp"
#include "gyro_afe/chain.hpp"
#include "gyro_afe/components.hpp"
#include "gyro_afe/config.hpp"
#include "gyro_afe/errors.hpp"
#include "gyro_afe/montecarlo.hpp"
#include "gyro_afe/preamp.hpp"
#include "gyro_afe/signal_model.hpp"
