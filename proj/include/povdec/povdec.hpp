#pragma once

#include "povdec/compensated_sum.hpp"
#include "povdec/decomposition.hpp"
#include "povdec/error.hpp"
#include "povdec/gpi.hpp"
#include "povdec/indicators.hpp"
#include "povdec/ordered_sample.hpp"
#include "povdec/types.hpp"
