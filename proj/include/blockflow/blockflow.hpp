#pragma once

// Umbrella header: the full stack. Individual blocks are usable on their
// own; include the subdirectory headers directly for that.

#include "blockflow/core/dag.hpp"
#include "blockflow/core/errors.hpp"
#include "blockflow/core/events.hpp"
#include "blockflow/core/rand.hpp"
#include "blockflow/core/requirements.hpp"
#include "blockflow/core/state.hpp"
#include "blockflow/core/task.hpp"
#include "blockflow/core/translate.hpp"
#include "blockflow/ensemble/execute.hpp"
#include "blockflow/ensemble/pattern.hpp"
#include "blockflow/harness/metrics.hpp"
#include "blockflow/harness/runner.hpp"
#include "blockflow/harness/scenario.hpp"
#include "blockflow/interop/broker.hpp"
#include "blockflow/interop/subsystem.hpp"
#include "blockflow/interop/task_file.hpp"
#include "blockflow/pilot/connector.hpp"
#include "blockflow/pilot/runtime.hpp"
#include "blockflow/pilot/saga_connector.hpp"
#include "blockflow/pilot/types.hpp"
#include "blockflow/resource/backend.hpp"
#include "blockflow/resource/local.hpp"
#include "blockflow/resource/model.hpp"
#include "blockflow/resource/sim_batch.hpp"
#include "blockflow/wlms/enact.hpp"
#include "blockflow/wlms/strategy.hpp"
