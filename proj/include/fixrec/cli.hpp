#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fixrec::cli {

/// Dispatches `ingest-reports`, `ingest-commits`, `train`, `topics show`,
/// `link`, `summarize`, `evaluate`, `recommend`. Machine-readable JSON goes
/// to `out`, human diagnostics to `err`. Returns 0 on success, 1 on usage
/// errors, 2 on data errors. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fixrec::cli
