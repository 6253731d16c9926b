#pragma once

#include "gradvar/core.hpp"
#include "gradvar/dynamic.hpp"
#include "gradvar/errors.hpp"
#include "gradvar/experiment.hpp"
#include "gradvar/loss.hpp"
#include "gradvar/oftrl.hpp"
#include "gradvar/oracle.hpp"
#include "gradvar/point.hpp"
#include "gradvar/reduction.hpp"
#include "gradvar/regularizer.hpp"
#include "gradvar/sea.hpp"
#include "gradvar/transcript.hpp"
#include "gradvar/virtual_clip.hpp"
