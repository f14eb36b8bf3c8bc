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

#pragma once

#include <functional>
#include <sstream>
#include <string>
#include <string_view>

namespace usdefake::log {

enum class Level { kDebug = 0, kInfo = 1, kWarn = 2, kError = 3 };

using Sink = std::function<void(Level, std::string_view)>;

// Replaces the process-wide sink. An empty sink restores the stderr default.
void set_sink(Sink sink);
void set_level(Level level);
Level level();

void write(Level level, std::string_view message);

template <typename... Args>
void emit(Level lvl, Args&&... args) {
  if (lvl < level()) return;
  std::ostringstream os;
  (os << ... << std::forward<Args>(args));
  write(lvl, os.str());
}

template <typename... Args>
void info(Args&&... args) { emit(Level::kInfo, std::forward<Args>(args)...); }

template <typename... Args>
void warn(Args&&... args) { emit(Level::kWarn, std::forward<Args>(args)...); }

template <typename... Args>
void debug(Args&&... args) { emit(Level::kDebug, std::forward<Args>(args)...); }

}  // namespace usdefake::log
