#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace gmdoa {

using WarningHandler = std::function<void(std::string_view)>;

// Routes a non-fatal condition (variance floor hit, search clamped at the
// domain edge) to the installed handler. The default handler writes to stderr.
void warn(std::string_view message);

// Installs `handler` and returns the previous one. An empty handler silences
// warnings.
WarningHandler set_warning_handler(WarningHandler handler);

// Collects warnings for the lifetime of the object, restoring the previous
// handler on destruction.
class WarningCapture {
 public:
  WarningCapture();
  ~WarningCapture();
  WarningCapture(const WarningCapture&) = delete;
  WarningCapture& operator=(const WarningCapture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }

 private:
  std::vector<std::string> messages_;
  WarningHandler previous_;
};

}  // namespace gmdoa
