#include "gmdoa/diagnostics.hpp"

#include <iostream>
#include <mutex>

namespace gmdoa {
namespace {

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& handler_slot() {
  static WarningHandler handler = [](std::string_view msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return handler;
}

}  // namespace

void warn(std::string_view message) {
  std::lock_guard lock(handler_mutex());
  if (handler_slot()) handler_slot()(message);
}

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(handler_mutex());
  return std::exchange(handler_slot(), std::move(handler));
}

WarningCapture::WarningCapture()
    : previous_(set_warning_handler([this](std::string_view msg) { messages_.emplace_back(msg); })) {}

WarningCapture::~WarningCapture() { set_warning_handler(std::move(previous_)); }

}  // namespace gmdoa
