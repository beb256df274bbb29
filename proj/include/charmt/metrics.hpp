#pragma once

#include "charmt/bleu.hpp"
#include "charmt/chrf.hpp"
#include "charmt/levenshtein.hpp"
#include "charmt/ttest.hpp"
