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

#include "fedf/audit.hpp"

#include <algorithm>
#include <set>

#include "fedf/ternary.hpp"

namespace fedf {

namespace {

struct PerEpochWorker {
  std::size_t start_epoch = 0;
  std::size_t cost = 0;
  std::size_t cmd_model = 0;
  std::size_t cmd_ternary = 0;
  std::size_t model = 0;
  std::size_t ternary = 0;
  bool ternary_all_zero = true;
};

std::string describe(std::uint64_t epoch, WorkerId worker, const char* what) {
  return "epoch " + std::to_string(epoch) + ", worker " +
         std::to_string(worker) + ": " + what;
}

}  // namespace

AuditReport audit(const std::vector<TranscriptEntry>& entries,
                  const std::vector<std::vector<std::uint8_t>>& canaries) {
  AuditReport report;
  auto violation = [&](const std::string& text) {
    report.inventory_violations.push_back(text);
  };

  // Worker inventory from registration requests.
  std::set<WorkerId> workers;
  std::map<WorkerId, std::size_t> register_requests;
  std::map<WorkerId, std::size_t> register_replies;
  std::map<WorkerId, std::size_t> end_runs;
  std::uint64_t max_epoch = 0;

  for (const TranscriptEntry& e : entries) {
    if (e.kind == MessageKind::kRegister) {
      if (e.epoch != 0) {
        violation("REGISTER with nonzero epoch " + std::to_string(e.epoch));
      }
      if (e.sender == kMasterId) {
        register_replies[e.receiver] += 1;
      } else {
        workers.insert(e.sender);
        register_requests[e.sender] += 1;
      }
    }
    max_epoch = std::max(max_epoch, e.epoch);
  }
  report.workers.assign(workers.begin(), workers.end());
  report.epochs = static_cast<std::size_t>(max_epoch);

  std::map<std::uint64_t, std::map<WorkerId, PerEpochWorker>> per_epoch;
  std::map<std::uint64_t, std::vector<WorkerId>> model_senders;

  for (const TranscriptEntry& e : entries) {
    const bool from_master = e.sender == kMasterId;
    const WorkerId peer = from_master ? e.receiver : e.sender;
    if (e.kind != MessageKind::kRegister && workers.count(peer) == 0) {
      violation("message " + std::string(message_kind_name(e.kind)) +
                " involves unregistered party " + std::to_string(peer));
      continue;
    }
    switch (e.kind) {
      case MessageKind::kRegister:
        break;  // handled above
      case MessageKind::kEndRun:
        if (!from_master) {
          violation("END_RUN sent by worker " + std::to_string(e.sender));
        } else {
          end_runs[e.receiver] += 1;
        }
        break;
      case MessageKind::kStartEpoch:
        if (!from_master) {
          violation(describe(e.epoch, e.sender, "START_EPOCH sent by worker"));
        } else {
          per_epoch[e.epoch][e.receiver].start_epoch += 1;
        }
        break;
      case MessageKind::kCmdSendModel:
        if (!from_master) {
          violation(describe(e.epoch, e.sender, "command sent by worker"));
        } else {
          per_epoch[e.epoch][e.receiver].cmd_model += 1;
        }
        break;
      case MessageKind::kCmdSendTernary:
        if (!from_master) {
          violation(describe(e.epoch, e.sender, "command sent by worker"));
        } else {
          per_epoch[e.epoch][e.receiver].cmd_ternary += 1;
        }
        break;
      case MessageKind::kCost:
        if (from_master) {
          violation(describe(e.epoch, e.receiver, "COST sent by master"));
        } else {
          per_epoch[e.epoch][e.sender].cost += 1;
        }
        break;
      case MessageKind::kModel:
        if (from_master) {
          violation(describe(e.epoch, e.receiver, "MODEL sent by master"));
        } else {
          per_epoch[e.epoch][e.sender].model += 1;
          model_senders[e.epoch].push_back(e.sender);
        }
        break;
      case MessageKind::kTernary:
        if (from_master) {
          violation(describe(e.epoch, e.receiver, "TERNARY sent by master"));
        } else {
          PerEpochWorker& slot = per_epoch[e.epoch][e.sender];
          slot.ternary += 1;
          try {
            const TernaryVector t = unpack(
                packed_from_bytes(e.payload.data(), e.payload.size()));
            if (!t.all_zero()) slot.ternary_all_zero = false;
          } catch (const Error&) {
            violation(describe(e.epoch, e.sender,
                               "undecodable ternary payload"));
          }
        }
        break;
    }
  }

  for (WorkerId w : report.workers) {
    if (register_requests[w] != 1) {
      violation("worker " + std::to_string(w) + " sent " +
                std::to_string(register_requests[w]) + " REGISTER requests");
    }
    if (register_replies[w] != 1) {
      violation("worker " + std::to_string(w) + " received " +
                std::to_string(register_replies[w]) + " REGISTER replies");
    }
    if (end_runs[w] != 1) {
      violation("worker " + std::to_string(w) + " received " +
                std::to_string(end_runs[w]) + " END_RUN messages");
    }
  }

  // Per-epoch inventory: one START_EPOCH, one COST, one command, and exactly
  // the response the command asked for; exactly one pilot per epoch.
  for (std::uint64_t t = 1; t <= max_epoch; ++t) {
    for (WorkerId w : report.workers) {
      const PerEpochWorker slot = per_epoch[t][w];
      if (slot.start_epoch != 1) {
        violation(describe(t, w, "START_EPOCH count != 1"));
      }
      if (slot.cost != 1) violation(describe(t, w, "COST count != 1"));
      if (slot.cmd_model + slot.cmd_ternary != 1) {
        violation(describe(t, w, "command count != 1"));
      }
      if (slot.model + slot.ternary != 1) {
        violation(describe(t, w, "expected exactly one of MODEL/TERNARY"));
      } else if (slot.model != slot.cmd_model ||
                 slot.ternary != slot.cmd_ternary) {
        violation(describe(t, w, "response does not match command"));
      }
    }
    const auto senders = model_senders.find(t);
    if (senders == model_senders.end() || senders->second.size() != 1) {
      violation("epoch " + std::to_string(t) + ": pilot count != 1");
    }
  }

  // Longest consecutive-pilot run per worker.
  for (WorkerId w : report.workers) report.max_consecutive_pilot[w] = 0;
  WorkerId current = 0;
  std::size_t run = 0;
  for (std::uint64_t t = 1; t <= max_epoch; ++t) {
    const auto senders = model_senders.find(t);
    if (senders == model_senders.end() || senders->second.size() != 1) {
      current = 0;
      run = 0;
      continue;
    }
    const WorkerId pilot = senders->second.front();
    run = pilot == current ? run + 1 : 1;
    current = pilot;
    auto& best = report.max_consecutive_pilot[pilot];
    best = std::max(best, run);
  }
  if (report.workers.size() >= 2 && max_epoch >= 1) {
    for (const auto& [w, longest] : report.max_consecutive_pilot) {
      if (longest == max_epoch) report.full_run_monopolist = w;
    }
  }

  // Epochs whose entire non-pilot cohort reported an all-zero ternary.
  for (std::uint64_t t = 1; t <= max_epoch; ++t) {
    bool any = false;
    bool all_zero = true;
    for (const auto& [w, slot] : per_epoch[t]) {
      if (slot.ternary > 0) {
        any = true;
        if (!slot.ternary_all_zero) all_zero = false;
      }
    }
    if (any && all_zero) report.all_zero_ternary_epochs.push_back(t);
  }

  for (const TranscriptEntry& e : entries) {
    for (const std::vector<std::uint8_t>& canary : canaries) {
      if (canary.empty()) continue;
      auto it = e.payload.begin();
      while ((it = std::search(it, e.payload.end(), canary.begin(),
                               canary.end())) != e.payload.end()) {
        CanaryHit hit;
        hit.seq = e.seq;
        hit.kind = e.kind;
        hit.epoch = e.epoch;
        hit.sender = e.sender;
        hit.offset = static_cast<std::size_t>(it - e.payload.begin());
        report.canary_hits.push_back(hit);
        ++it;
      }
    }
  }
  return report;
}

nlohmann::json audit_report_to_json(const AuditReport& report) {
  nlohmann::json j;
  j["epochs"] = report.epochs;
  j["workers"] = report.workers;
  j["inventory_violations"] = report.inventory_violations;
  nlohmann::json runs = nlohmann::json::object();
  for (const auto& [w, n] : report.max_consecutive_pilot) {
    runs[std::to_string(w)] = n;
  }
  j["max_consecutive_pilot"] = runs;
  if (report.full_run_monopolist.has_value()) {
    j["full_run_monopolist"] = *report.full_run_monopolist;
  } else {
    j["full_run_monopolist"] = nullptr;
  }
  j["all_zero_ternary_epochs"] = report.all_zero_ternary_epochs;
  nlohmann::json hits = nlohmann::json::array();
  for (const CanaryHit& h : report.canary_hits) {
    hits.push_back({{"seq", h.seq},
                    {"kind", message_kind_name(h.kind)},
                    {"epoch", h.epoch},
                    {"sender", h.sender},
                    {"offset", h.offset}});
  }
  j["canary_hits"] = hits;
  j["clean"] = report.clean();
  return j;
}

}  // namespace fedf
