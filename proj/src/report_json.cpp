#include "otselect/report_json.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace otselect {
namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

// Minimal streaming writer: objects and arrays on one line each, keys in
// call order.
class Writer {
 public:
  Writer& begin_object() { return open('{'); }
  Writer& end_object() { return close('}'); }
  Writer& begin_array() { return open('['); }
  Writer& end_array() { return close(']'); }

  Writer& key(const std::string& k) {
    comma();
    out_ << quote(k) << ':';
    pending_value_ = true;
    return *this;
  }
  Writer& value(double x) { return raw(format_double(x)); }
  Writer& value(std::size_t x) { return raw(std::to_string(x)); }
  Writer& value(std::uint64_t x, int) { return raw(std::to_string(x)); }
  Writer& value(bool b) { return raw(b ? "true" : "false"); }
  Writer& value(const std::string& s) { return raw(quote(s)); }

  std::string str() const { return out_.str(); }

 private:
  Writer& open(char c) {
    comma();
    out_ << c;
    first_ = true;
    return *this;
  }
  Writer& close(char c) {
    out_ << c;
    first_ = false;
    return *this;
  }
  Writer& raw(const std::string& s) {
    comma();
    out_ << s;
    return *this;
  }
  void comma() {
    if (pending_value_) {
      pending_value_ = false;
      first_ = false;
      return;
    }
    if (!first_) out_ << ',';
    first_ = false;
  }

  std::ostringstream out_;
  bool first_ = true;
  bool pending_value_ = false;
};

void write_selection(Writer& w, const SelectionResult& r) {
  w.begin_object();
  w.key("method").value(r.method);
  w.key("seed").value(r.seed, 0);
  w.key("k").value(r.k);
  w.key("selected").begin_array();
  for (std::size_t i : r.selected) w.value(i);
  w.end_array();
  w.key("weights").begin_array();
  for (double x : r.final_weights.values()) w.value(x);
  w.end_array();
  w.key("trace").begin_array();
  for (const auto& s : r.trace) {
    w.begin_object();
    w.key("step").value(s.step);
    w.key("ot_value").value(s.ot_value);
    w.key("div_energy").value(s.div_energy);
    w.key("entropy").value(s.entropy);
    w.key("sinkhorn_iterations").value(s.sinkhorn_iterations);
    w.key("converged").value(s.converged);
    w.end_object();
  }
  w.end_array();
  w.key("params").begin_object();
  for (const auto& [name, v] : r.params) w.key(name).value(v);
  w.end_object();
  w.key("fallback").value(r.fallback);
  w.end_object();
}

void write_report(Writer& w, const SubsetReport& r) {
  w.begin_object();
  w.key("method").value(r.method);
  w.key("k").value(r.k);
  w.key("vendi").value(r.vendi);
  w.key("mean_attr").value(r.mean_attr);
  w.key("ot_to_val").value(r.ot_to_val);
  w.key("params").begin_object();
  w.key("epsilon").value(r.sinkhorn.epsilon);
  w.key("tol").value(r.sinkhorn.tol);
  w.key("max_iter").value(r.sinkhorn.max_iter);
  w.end_object();
  w.end_object();
}

}  // namespace

std::string format_double(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string to_json(const SelectionResult& r) {
  Writer w;
  write_selection(w, r);
  return w.str() + "\n";
}

std::string to_json(const SubsetReport& r) {
  Writer w;
  write_report(w, r);
  return w.str() + "\n";
}

std::string to_json(const LoopReport& r) {
  Writer w;
  w.begin_object();
  w.key("seed").value(r.seed, 0);
  w.key("records").begin_array();
  for (const auto& rec : r.records) {
    w.begin_object();
    w.key("iter").value(rec.iter);
    w.key("method").value(rec.method);
    w.key("ot_to_val").value(rec.ot_to_val);
    w.key("vendi").value(rec.vendi);
    w.key("mean_attr").value(rec.mean_attr);
    w.key("selected_count").value(rec.selected_count);
    w.key("pool_size").value(rec.pool_size);
    w.end_object();
  }
  w.end_array();
  w.key("comparison").begin_array();
  for (const auto& c : r.comparison) write_report(w, c);
  w.end_array();
  w.end_object();
  return w.str() + "\n";
}

std::string to_csv(const LoopReport& r) {
  std::string out = "iter,method,ot_to_val,vendi,mean_attr,selected_count,pool_size\n";
  for (const auto& rec : r.records) {
    out += std::to_string(rec.iter) + "," + rec.method + "," + format_double(rec.ot_to_val) + "," +
           format_double(rec.vendi) + "," + format_double(rec.mean_attr) + "," +
           std::to_string(rec.selected_count) + "," + std::to_string(rec.pool_size) + "\n";
  }
  return out;
}

}  // namespace otselect
