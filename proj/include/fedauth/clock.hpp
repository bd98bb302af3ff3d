/*
 * Copyright 2026 The fedauth Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>

namespace fedauth {

/// Time source in unix seconds. Injectable so tests and scenarios can drive
/// a fake clock; 1-second granularity throughout.
class Clock {
  public:
    virtual ~Clock() = default;
    [[nodiscard]] virtual int64_t now() const = 0;
};

class SystemClock final : public Clock {
  public:
    [[nodiscard]] int64_t now() const override {
        return std::chrono::duration_cast<std::chrono::seconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    }
};

/// Settable clock. Never moves unless told to.
class FakeClock final : public Clock {
  public:
    explicit FakeClock(int64_t start = 0) : now_(start) {}

    [[nodiscard]] int64_t now() const override { return now_.load(); }
    void set(int64_t t) { now_.store(t); }
    void advance(int64_t seconds) { now_.fetch_add(seconds); }

  private:
    std::atomic<int64_t> now_;
};

inline std::shared_ptr<Clock> system_clock() {
    return std::make_shared<SystemClock>();
}

}  // namespace fedauth
