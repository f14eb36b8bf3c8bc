// Copyright 2026 The usdefake Authors. All Rights Reserved.
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

#include "usdefake/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace usdefake::log {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

Sink& sink_slot() {
  static Sink s;
  return s;
}

std::atomic<int> g_level{static_cast<int>(Level::kInfo)};

const char* tag(Level l) {
  switch (l) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarn: return "warning";
    case Level::kError: return "error";
  }
  return "?";
}

}  // namespace

void set_sink(Sink sink) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  sink_slot() = std::move(sink);
}

void set_level(Level l) { g_level.store(static_cast<int>(l)); }

Level level() { return static_cast<Level>(g_level.load()); }

void write(Level l, std::string_view message) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  if (sink_slot()) {
    sink_slot()(l, message);
    return;
  }
  std::cerr << "[usdefake " << tag(l) << "] " << message << '\n';
}

}  // namespace usdefake::log
