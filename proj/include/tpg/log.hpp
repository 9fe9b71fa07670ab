#pragma once

#include <string>

namespace tpg {

// Warnings go to stderr unless silenced. Each distinct message is
// emitted at most once per process.
void warn_once(const std::string& message);
void set_warnings_enabled(bool enabled);

}  // namespace tpg
