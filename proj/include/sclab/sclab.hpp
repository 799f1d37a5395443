#pragma once

#include "sclab/core/error.hpp"
#include "sclab/core/game.hpp"
#include "sclab/core/parallel.hpp"
#include "sclab/core/rng.hpp"
#include "sclab/games/chess.hpp"
#include "sclab/games/tictactoe.hpp"
#include "sclab/eval/evaluation.hpp"
#include "sclab/eval/heuristic.hpp"
#include "sclab/eval/tinynet.hpp"
#include "sclab/search/config.hpp"
#include "sclab/search/search.hpp"
#include "sclab/selfplay/pgn.hpp"
#include "sclab/selfplay/record.hpp"
#include "sclab/selfplay/selfplay.hpp"
#include "sclab/match/match.hpp"
#include "sclab/training/training.hpp"
#include "sclab/cli/analyze.hpp"
#include "sclab/cli/config.hpp"
#include "sclab/cli/factory.hpp"
