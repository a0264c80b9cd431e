#pragma once

#include "cesmarket/error.hpp"
#include "cesmarket/formulations/markets.hpp"
#include "cesmarket/formulations/ves.hpp"
#include "cesmarket/game.hpp"
#include "cesmarket/generator.hpp"
#include "cesmarket/instance_json.hpp"
#include "cesmarket/metrics.hpp"
#include "cesmarket/milp/backend.hpp"
#include "cesmarket/pipeline.hpp"
#include "cesmarket/report.hpp"
