#pragma once

#include "charmt/attribution.hpp"
#include "charmt/control_set.hpp"
#include "charmt/corpus_io.hpp"
#include "charmt/error.hpp"
#include "charmt/metrics.hpp"
#include "charmt/text.hpp"
#include "charmt/version.hpp"
#include "charmt/word_accuracy.hpp"
#include "charmt/zeroshot.hpp"
