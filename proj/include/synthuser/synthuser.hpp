#pragma once

// Everything except the HTTP layer (synthuser/http_api.hpp), which pulls in
// cpp-httplib.
#include "synthuser/agents.hpp"
#include "synthuser/client.hpp"
#include "synthuser/component_id.hpp"
#include "synthuser/config.hpp"
#include "synthuser/error.hpp"
#include "synthuser/harness.hpp"
#include "synthuser/model.hpp"
#include "synthuser/play.hpp"
#include "synthuser/rng.hpp"
#include "synthuser/server.hpp"
#include "synthuser/trace.hpp"
#include "synthuser/tracker.hpp"
#include "synthuser/view.hpp"
