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


#include "rankspace/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace rankspace {

namespace {

bool all_punct(const std::string& tok) {
  return std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return std::ispunct(c) != 0; });
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError(0, "cannot open corpus file '" + path + "'");
  return in;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& line, const CorpusOptions& options) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) {
    if (options.lowercase)
      std::transform(tok.begin(), tok.end(), tok.begin(), [](unsigned char c) { return std::tolower(c); });
    if (options.strip_punct && all_punct(tok)) continue;
    out.push_back(std::move(tok));
  }
  return out;
}

LoadedCorpus read_corpus(std::istream& in, const Vocab& vocab, const CorpusOptions& options) {
  LoadedCorpus out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = tokenize(line, options);
    if (toks.empty()) {
      ++out.skipped_empty;
      continue;
    }
    std::vector<int> ids;
    ids.reserve(toks.size() + 1);
    for (const auto& t : toks) {
      if (auto id = vocab.find(t)) {
        ids.push_back(*id);
      } else if (options.map_unk) {
        ids.push_back(vocab.unk());
      } else {
        throw CorpusError(lineno, fmt::format("line {}: token '{}' is not in the vocabulary", lineno, t));
      }
    }
    if (options.append_eos) ids.push_back(vocab.eos());
    out.sentences.push_back(std::move(ids));
    out.line_numbers.push_back(lineno);
  }
  return out;
}

LoadedCorpus load_corpus(const std::string& path, const Vocab& vocab, const CorpusOptions& options) {
  auto in = open_or_throw(path);
  return read_corpus(in, vocab, options);
}

Vocab build_vocab(const std::string& path, const CorpusOptions& options, std::size_t max_size) {
  auto in = open_or_throw(path);
  const std::string unk = "<unk>", eos = "<eos>";
  std::map<std::string, std::size_t> counts;
  std::string line;
  while (std::getline(in, line))
    for (auto& t : tokenize(line, options))
      if (t != unk && t != eos) ++counts[t];
  std::vector<std::pair<std::string, std::size_t>> sorted(counts.begin(), counts.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens{unk, eos};
  for (auto& [tok, c] : sorted) {
    if (max_size && tokens.size() >= max_size) break;
    tokens.push_back(tok);
  }
  return Vocab(std::move(tokens), unk, eos);
}

}  // namespace rankspace
