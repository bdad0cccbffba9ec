#pragma once

#include <map>
#include <string>

#include "mtpath/types.hpp"

namespace mtpath {

struct LoadOptions {
  std::string open_delim = "<<";   // annotation markup delimiters
  std::string close_delim = ">>";
  std::map<std::string, int> severity_remap;  // dataset label -> level 0..3
};

// JSON-Lines trace bundles, one record per line, snake_case fields, missing
// optionals omitted. Every record must pass validate_record or loading fails
// with the full violation list (ValidationFailure). Malformed JSON or wrong
// field types raise SchemaError naming the line and field.
Corpus load_corpus(const std::string& path, const LoadOptions& opts = {});

void save_corpus(const Corpus& c, const std::string& path);

// Annotation overlay: JSON-Lines of {"id", "annotation"} merged into an
// already-loaded corpus by id. Unknown ids and invalid merged annotations
// fail with the full violation list.
void merge_annotation_overlay(Corpus& c, const std::string& path, const LoadOptions& opts = {});

}  // namespace mtpath
