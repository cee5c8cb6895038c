// Copyright 2026 The FEDF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedf/transcript.hpp"

namespace fedf {

struct CanaryHit {
  std::uint64_t seq = 0;
  MessageKind kind = MessageKind::kEndRun;
  std::uint64_t epoch = 0;
  WorkerId sender = 0;
  std::size_t offset = 0;  // byte offset inside the payload
};

// Transcript-level privacy audit. Violations break the protocol's message
// inventory; the remaining findings are the preconditions of the known
// inference attacks: a worker whose model is requested every single epoch,
// and epochs where every non-pilot ternary is all zeros.
struct AuditReport {
  std::size_t epochs = 0;
  std::vector<WorkerId> workers;
  std::vector<std::string> inventory_violations;
  std::map<WorkerId, std::size_t> max_consecutive_pilot;
  std::optional<WorkerId> full_run_monopolist;
  std::vector<std::uint64_t> all_zero_ternary_epochs;
  std::vector<CanaryHit> canary_hits;

  bool clean() const {
    return inventory_violations.empty() && !full_run_monopolist.has_value() &&
           all_zero_ternary_epochs.empty() && canary_hits.empty();
  }
};

// Canaries are byte patterns planted in fixtures (raw data values, private
// hyperparameters); any occurrence inside a payload is a leak.
AuditReport audit(const std::vector<TranscriptEntry>& entries,
                  const std::vector<std::vector<std::uint8_t>>& canaries = {});

nlohmann::json audit_report_to_json(const AuditReport& report);

}  // namespace fedf
