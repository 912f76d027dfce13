// Copyright 2026 The urbanenv Authors.
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

#ifndef URBANENV_TESTS_MOCK_MAPS_HPP
#define URBANENV_TESTS_MOCK_MAPS_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <httplib.h>

#include "urbanenv/image.hpp"

namespace urbanenv::testing {

// Local static-maps stand-in. Serves a PNG per request, optionally failing
// the first `fail_first` requests with `fail_status`, and tracks the peak
// number of concurrent requests.
class MockMaps {
 public:
  explicit MockMaps(int delay_ms = 0) : delay_ms_(delay_ms) {
    server_.Get("/staticmap", [this](const httplib::Request& req, httplib::Response& res) {
      const int now = ++in_flight_;
      {
        std::lock_guard lock(mu_);
        peak_ = std::max(peak_, now);
        centers_.push_back(req.get_param_value("center"));
      }
      if (delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
      const int n = requests_++;
      if (n < fail_first_) {
        res.status = fail_status_;
      } else {
        TileImage img(8, 8);
        for (std::size_t i = 0; i < img.rgb.size(); ++i) img.rgb[i] = static_cast<std::uint8_t>(i * 7 + n);
        std::string body = encode_png(img);
        {
          std::lock_guard lock(mu_);
          last_body_ = body;
        }
        res.set_content(std::move(body), "image/png");
      }
      --in_flight_;
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockMaps() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return fmt::format("http://127.0.0.1:{}/staticmap", port_); }
  void fail_first(int n, int status) {
    fail_first_ = n;
    fail_status_ = status;
  }
  int requests() const { return requests_; }
  int peak() const { return peak_; }
  std::string last_body() {
    std::lock_guard lock(mu_);
    return last_body_;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  int delay_ms_;
  std::atomic<int> requests_{0};
  std::atomic<int> in_flight_{0};
  int peak_ = 0;
  int fail_first_ = 0;
  int fail_status_ = 500;
  std::mutex mu_;
  std::vector<std::string> centers_;
  std::string last_body_;
};

}  // namespace urbanenv::testing

#endif  // URBANENV_TESTS_MOCK_MAPS_HPP
