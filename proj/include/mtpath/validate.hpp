#pragma once

#include <string>
#include <vector>

#include "mtpath/types.hpp"

namespace mtpath {

// Empty result iff every type invariant holds; each violation is
// "field: rule". Violations are data, not failures.
std::vector<std::string> validate_record(const TranslationRecord& r);

// Unique ids plus per-record validation; throws ValidationFailure listing
// every violation across the corpus.
void validate_corpus(const Corpus& c);

}  // namespace mtpath
