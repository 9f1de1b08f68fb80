#pragma once

// Inference, knowledge-base and evaluation surface. The HTTP service and CLI
// live in brb/service.hpp and brb/cli.hpp.

#include "brb/error.hpp"
#include "brb/evaluation.hpp"
#include "brb/inference.hpp"
#include "brb/knowledge_base.hpp"
#include "brb/serialization.hpp"
#include "brb/store.hpp"
#include "brb/types.hpp"
