#pragma once

#include "asynchp/analysis.hpp"
#include "asynchp/ast_json.hpp"
#include "asynchp/interp.hpp"
#include "asynchp/postlist.hpp"
#include "asynchp/syntax.hpp"
