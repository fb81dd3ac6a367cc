/* Copyright (c) 2026 The r2s Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

#include <iostream>
#include <mutex>
#include <string_view>

namespace r2s {

inline void log_line(std::string_view level, std::string_view message) {
  static std::mutex mutex;
  std::lock_guard lock(mutex);
  std::cerr << level << ": " << message << '\n';
}

inline void log_warning(std::string_view message) { log_line("warning", message); }
inline void log_info(std::string_view message) { log_line("info", message); }

}  // namespace r2s
