#pragma once

#include "xprace/errors.hpp"
#include "xprace/geometry.hpp"
#include "xprace/track.hpp"
#include "xprace/physics.hpp"
#include "xprace/sensors.hpp"
#include "xprace/neat/genome.hpp"
#include "xprace/neat/network.hpp"
#include "xprace/neat/operators.hpp"
#include "xprace/neat/species.hpp"
#include "xprace/neat/serialize.hpp"
#include "xprace/evaluation.hpp"
#include "xprace/harness/config.hpp"
#include "xprace/harness/log.hpp"
#include "xprace/harness/replay.hpp"
#include "xprace/harness/render.hpp"
#include "xprace/harness/trial.hpp"
#include "xprace/harness/baseline.hpp"
