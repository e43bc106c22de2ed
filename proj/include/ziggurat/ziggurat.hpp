#pragma once
// Umbrella header.

#include "ziggurat/agent_graph.hpp"
#include "ziggurat/agent_output.hpp"
#include "ziggurat/audit.hpp"
#include "ziggurat/config.hpp"
#include "ziggurat/context.hpp"
#include "ziggurat/errors.hpp"
#include "ziggurat/evolution.hpp"
#include "ziggurat/executor.hpp"
#include "ziggurat/http_executor.hpp"
#include "ziggurat/metrics.hpp"
#include "ziggurat/orchestrator.hpp"
#include "ziggurat/record.hpp"
#include "ziggurat/router.hpp"
#include "ziggurat/run_io.hpp"
#include "ziggurat/scenario.hpp"
#include "ziggurat/simulate.hpp"
#include "ziggurat/system_audit.hpp"
#include "ziggurat/task.hpp"
#include "ziggurat/tokens.hpp"
#include "ziggurat/workspace.hpp"
