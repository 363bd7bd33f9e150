#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nhlaw {

/// Exit codes: 0 success, 1 failed acceptance predicate or numerical failure,
/// 2 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nhlaw
