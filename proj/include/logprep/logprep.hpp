#pragma once

#include "logprep/error.hpp"
#include "logprep/csv.hpp"
#include "logprep/corpus.hpp"
#include "logprep/catalog.hpp"
#include "logprep/masker.hpp"
#include "logprep/parsers.hpp"
#include "logprep/metrics.hpp"
