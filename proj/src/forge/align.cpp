// Copyright 2026 The Midsmith Authors
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

#include <optional>

#include "midsmith/backends/backend.hpp"
#include "midsmith/core/error.hpp"
#include "midsmith/core/parallel.hpp"
#include "midsmith/core/random.hpp"
#include "midsmith/forge/forge.hpp"
#include "midsmith/protocol/output.hpp"
#include "midsmith/protocol/requests.hpp"

namespace midsmith {

RecaptionResult recaption_corpus(const std::vector<std::string>& image_refs, ChatBackend& chat,
                                 const PromptTemplates& templates, std::size_t parallelism) {
  std::vector<std::optional<CaptionedPair>> pairs(image_refs.size());
  std::vector<std::optional<ItemFailure>> failures(image_refs.size());
  parallel_for(image_refs.size(), parallelism, [&](std::size_t i) {
    const auto& ref = image_refs[i];
    try {
      const std::string caption{trim(chat.complete(build_caption_request(templates, ref)))};
      if (caption.empty()) throw Error(ErrorKind::MalformedResponse, "empty caption");
      pairs[i] = CaptionedPair{ref, caption};
    } catch (const Error& e) {
      failures[i] = ItemFailure{ref, e.what()};
    }
  });
  RecaptionResult out;
  for (std::size_t i = 0; i < image_refs.size(); ++i) {
    if (pairs[i]) out.pairs.push_back(std::move(*pairs[i]));
    if (failures[i]) out.failures.push_back(std::move(*failures[i]));
  }
  return out;
}

std::vector<CaptionedPair> select_icl_samples(const std::vector<CaptionedPair>& corpus,
                                              std::size_t n, std::uint64_t rng_seed) {
  if (n > corpus.size()) {
    throw Error(ErrorKind::InsufficientCorpus, "asked for " + std::to_string(n) +
                                                   " samples from a corpus of " +
                                                   std::to_string(corpus.size()));
  }
  // Partial Fisher-Yates over indices: the first n slots are the sample.
  std::vector<std::size_t> idx(corpus.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(rng_seed);
  std::vector<CaptionedPair> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_below(rng, idx.size() - i));
    std::swap(idx[i], idx[j]);
    out.push_back(corpus[idx[i]]);
  }
  return out;
}

}  // namespace midsmith
