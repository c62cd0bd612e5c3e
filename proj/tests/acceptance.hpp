#pragma once
// Acceptance harness: each criterion prints exactly one pass/fail line with
// the measured values, so a failed gate shows what was off without rerunning.

#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

namespace acceptance {

struct Criterion {
  std::string name;
  // Fills `detail` with measured numbers; returns pass/fail.
  std::function<bool(std::string& detail)> check;
};

struct Suite {
  std::string name;
  std::vector<Criterion> criteria;
};

Suite build_math_suite();
Suite build_learning_suite();
Suite build_sequential_suite();

inline int run_suite(const Suite& suite) {
  int failed = 0;
  for (const auto& c : suite.criteria) {
    std::string detail;
    bool ok = false;
    try {
      ok = c.check(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", c.name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failed;
  }
  std::printf("%s suite: %zu/%zu criteria passed\n", suite.name.c_str(),
              suite.criteria.size() - std::size_t(failed),
              suite.criteria.size());
  return failed;
}

// printf-style detail builder.
template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

}  // namespace acceptance
