#pragma once

#include <functional>
#include <string>

namespace gbal {

using WarningHandler = std::function<void(const std::string&)>;

// Installs a process-wide sink for warnings and returns the previous one.
// The default handler writes to stderr.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(const std::string& message);

}  // namespace gbal
