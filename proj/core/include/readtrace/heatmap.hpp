#pragma once

#include <string>

#include "readtrace/gaze.hpp"
#include "readtrace/stimulus.hpp"

namespace readtrace {

// Background opacity for a mean bin: mean / 5, clamped to [0, 1].
double heatmap_opacity(double mean_bin);

// Standalone HTML page showing the prompt and both responses with every word
// shaded by its mean bin, plus a legend for bins 0 to 5. Whitespace of the
// source text is preserved. The output depends only on the arguments.
// Throws ValidationError when the aggregate does not match the stimulus.
std::string render_heatmap(const TokenizedStimulus& stimulus, const AggregateVector& aggregate);

}  // namespace readtrace
