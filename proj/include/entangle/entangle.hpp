#pragma once

#include "entangle/analysis.hpp"
#include "entangle/corpus.hpp"
#include "entangle/encoder.hpp"
#include "entangle/errors.hpp"
#include "entangle/fixture.hpp"
#include "entangle/hash.hpp"
#include "entangle/icl.hpp"
#include "entangle/io.hpp"
#include "entangle/label.hpp"
#include "entangle/losses.hpp"
#include "entangle/metrics.hpp"
#include "entangle/model.hpp"
#include "entangle/rng.hpp"
#include "entangle/transform.hpp"
#include "entangle/unicode.hpp"
