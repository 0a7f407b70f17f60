#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "json.hpp"

namespace sprayg {

struct CheckRecord {
  std::string name;
  std::size_t samples = 0;
  double max_residual = 0.0;
  double mean_residual = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  std::vector<double> residuals;
};

class ResidualAccumulator {
 public:
  ResidualAccumulator(std::string name, double tolerance) : name_(std::move(name)), tol_(tolerance) {}

  void add(double r) { values_.push_back(r); }
  std::size_t size() const { return values_.size(); }

  CheckRecord finish() const {
    CheckRecord rec;
    rec.name = name_;
    rec.tolerance = tol_;
    rec.samples = values_.size();
    rec.residuals = values_;
    double sum = 0.0;
    bool bad = false;
    for (double v : values_) {
      if (!std::isfinite(v)) bad = true;
      rec.max_residual = std::max(rec.max_residual, v);
      sum += v;
    }
    rec.mean_residual = values_.empty() ? 0.0 : sum / static_cast<double>(values_.size());
    if (bad) rec.max_residual = INFINITY;
    rec.pass = !bad && rec.max_residual <= tol_;
    return rec;
  }

 private:
  std::string name_;
  double tol_;
  std::vector<double> values_;
};

class VerificationReport {
 public:
  void add(CheckRecord rec) { checks_.push_back(std::move(rec)); }
  void add(const ResidualAccumulator& acc) { checks_.push_back(acc.finish()); }

  void append(const VerificationReport& other, const std::string& prefix = "") {
    for (CheckRecord rec : other.checks_) {
      if (!prefix.empty()) rec.name = prefix + rec.name;
      checks_.push_back(std::move(rec));
    }
  }

  const std::vector<CheckRecord>& checks() const { return checks_; }

  bool all_pass() const {
    return std::all_of(checks_.begin(), checks_.end(), [](const CheckRecord& c) { return c.pass; });
  }

  const CheckRecord* find(const std::string& name) const {
    for (const auto& c : checks_)
      if (c.name == name) return &c;
    return nullptr;
  }

  nlohmann::ordered_json checks_json() const {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : checks_) {
      nlohmann::ordered_json j;
      j["name"] = c.name;
      j["samples"] = c.samples;
      j["max_residual"] = finite_or_string(c.max_residual);
      j["mean_residual"] = finite_or_string(c.mean_residual);
      j["tolerance"] = c.tolerance;
      j["pass"] = c.pass;
      arr.push_back(std::move(j));
    }
    return arr;
  }

  std::string to_csv() const {
    std::string out = "check,sample_index,residual\n";
    char buf[64];
    for (const auto& c : checks_)
      for (std::size_t i = 0; i < c.residuals.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", c.residuals[i]);
        out += c.name + "," + std::to_string(i) + "," + buf + "\n";
      }
    return out;
  }

 private:
  static nlohmann::ordered_json finite_or_string(double v) {
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? "nan" : "inf";
  }

  std::vector<CheckRecord> checks_;
};

}  // namespace sprayg
