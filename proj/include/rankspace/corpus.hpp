// Copyright 2026 The rankspace Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef RANKSPACE_CORPUS_HPP
#define RANKSPACE_CORPUS_HPP

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "rankspace/grammar.hpp"
#include "rankspace/trainer.hpp"

namespace rankspace {

struct CorpusOptions {
  bool lowercase = false;
  bool strip_punct = false;  // drop tokens made only of punctuation
  bool map_unk = true;       // OOV -> unk; otherwise an error
  bool append_eos = false;
};

struct LoadedCorpus {
  Corpus sentences;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each sentence
  std::size_t skipped_empty = 0;
};

class CorpusError : public std::runtime_error {
 public:
  CorpusError(std::size_t line, const std::string& what) : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

std::vector<std::string> tokenize(const std::string& line, const CorpusOptions& options);

LoadedCorpus read_corpus(std::istream& in, const Vocab& vocab, const CorpusOptions& options);
// Throws CorpusError(0, ...) when the file cannot be opened.
LoadedCorpus load_corpus(const std::string& path, const Vocab& vocab, const CorpusOptions& options);

// Tokens ordered by descending frequency, ties alphabetical, after unk and
// eos. max_size (0 = unbounded) counts the two reserved entries.
Vocab build_vocab(const std::string& path, const CorpusOptions& options, std::size_t max_size = 0);

}  // namespace rankspace

#endif  // RANKSPACE_CORPUS_HPP
