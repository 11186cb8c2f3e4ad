#pragma once

#include "nfa/error.hpp"
#include "nfa/evaluation.hpp"
#include "nfa/io.hpp"
#include "nfa/models.hpp"
#include "nfa/nfb.hpp"
#include "nfa/pipeline.hpp"
#include "nfa/pnfis.hpp"
#include "nfa/schema.hpp"
#include "nfa/synthetic.hpp"
#include "nfa/training.hpp"
