#pragma once

#include <string>
#include <utility>
#include <vector>

namespace ecgdig {

// One pipeline stage with the parameters it actually ran with.
struct StageRecord {
  std::string stage;
  std::vector<std::pair<std::string, std::string>> params;
};

// Ordered audit trail of everything done to one sheet.
using ProcessingLog = std::vector<StageRecord>;

inline void log_stage(ProcessingLog& log, std::string stage,
                      std::vector<std::pair<std::string, std::string>> params = {}) {
  log.push_back({std::move(stage), std::move(params)});
}

}  // namespace ecgdig
