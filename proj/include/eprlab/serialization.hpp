#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "eprlab/channel.hpp"
#include "eprlab/correlation_graph.hpp"
#include "eprlab/invariance.hpp"
#include "eprlab/pauli.hpp"
#include "eprlab/qudit.hpp"

// File formats. All emitted JSON uses a fixed key order and fixed float
// formatting (17 significant digits, negative zero normalized), so equal
// inputs and seeds produce byte-identical output.

namespace eprlab {

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  std::string s(buf);
  if (s == "-0") s = "0";
  return s;
}

inline std::string format_int(long long x) { return std::to_string(x); }

inline std::string format_uint(std::uint64_t x) { return std::to_string(x); }

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

// Minimal ordered JSON builder: keys are emitted in insertion order.
class JsonWriter {
 public:
  JsonWriter& begin_object() { return raw("{"); }
  JsonWriter& end_object() { return close("}"); }
  JsonWriter& begin_array() { return raw("["); }
  JsonWriter& end_array() { return close("]"); }

  JsonWriter& key(const std::string& k) {
    comma();
    out_ += '"';
    out_ += json_escape(k);
    out_ += "\":";
    pending_value_ = true;
    return *this;
  }

  JsonWriter& value(double x) { return token(format_double(x)); }
  JsonWriter& value(long long x) { return token(format_int(x)); }
  JsonWriter& value(int x) { return token(format_int(x)); }
  JsonWriter& value(long x) { return token(format_int(x)); }
  JsonWriter& value(std::uint64_t x) { return token(format_uint(x)); }
  JsonWriter& value(bool b) { return token(b ? "true" : "false"); }
  JsonWriter& value(const std::string& s) { return token('"' + json_escape(s) + '"'); }
  JsonWriter& value(const char* s) { return value(std::string(s)); }
  JsonWriter& null() { return token("null"); }

  const std::string& str() const { return out_; }

 private:
  JsonWriter& raw(const char* t) {
    comma();
    out_ += t;
    need_comma_ = false;
    pending_value_ = false;
    return *this;
  }
  JsonWriter& close(const char* t) {
    out_ += t;
    need_comma_ = true;
    return *this;
  }
  JsonWriter& token(const std::string& t) {
    comma();
    out_ += t;
    need_comma_ = true;
    return *this;
  }
  void comma() {
    if (pending_value_) {
      pending_value_ = false;
      need_comma_ = false;
      return;
    }
    if (need_comma_) out_ += ',';
    need_comma_ = false;
  }

  std::string out_;
  bool need_comma_ = false;
  bool pending_value_ = false;
};

namespace detail {

inline void write_real_matrix_part(JsonWriter& w, const ComplexMatrix& m, bool imag) {
  w.begin_array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    w.begin_array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      w.value(imag ? m(r, c).imag() : m(r, c).real());
    w.end_array();
  }
  w.end_array();
}

inline void write_real_matrix(JsonWriter& w, const RealMatrix& m) {
  w.begin_array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    w.begin_array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) w.value(m(r, c));
    w.end_array();
  }
  w.end_array();
}

inline void write_real_vector(JsonWriter& w, const RealVector& v) {
  w.begin_array();
  for (Eigen::Index i = 0; i < v.size(); ++i) w.value(v(i));
  w.end_array();
}

}  // namespace detail

// --- density matrices -------------------------------------------------------

inline void write_density(JsonWriter& w, const DensityMatrix& rho) {
  w.begin_object();
  w.key("local_dim").value(rho.local_dim());
  w.key("bipartite").value(rho.bipartite());
  w.key("re");
  detail::write_real_matrix_part(w, rho.matrix(), false);
  w.key("im");
  detail::write_real_matrix_part(w, rho.matrix(), true);
  w.end_object();
}

inline std::string to_json(const DensityMatrix& rho) {
  JsonWriter w;
  write_density(w, rho);
  return w.str();
}

// --- bases ------------------------------------------------------------------

inline void write_basis(JsonWriter& w, const OrthonormalBasis& basis) {
  const int d = basis.local_dim();
  w.begin_object();
  w.key("local_dim").value(d);
  // One row per basis vector.
  w.key("vectors_re").begin_array();
  for (int i = 0; i < d; ++i) {
    w.begin_array();
    for (int j = 0; j < d; ++j) w.value(basis.matrix()(j, i).real());
    w.end_array();
  }
  w.end_array();
  w.key("vectors_im").begin_array();
  for (int i = 0; i < d; ++i) {
    w.begin_array();
    for (int j = 0; j < d; ++j) w.value(basis.matrix()(j, i).imag());
    w.end_array();
  }
  w.end_array();
  w.end_object();
}

inline std::string to_json(const OrthonormalBasis& basis) {
  JsonWriter w;
  write_basis(w, basis);
  return w.str();
}

// --- parsing ----------------------------------------------------------------

namespace detail {

inline nlohmann::json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(errc::parse_error, what + ": " + e.what());
  }
}

inline const nlohmann::json& require_field(const nlohmann::json& j, const char* name,
                                           const std::string& what) {
  if (!j.is_object() || !j.contains(name))
    throw Error(errc::parse_error, what + ": missing field \"" + name + "\"");
  return j.at(name);
}

inline RealMatrix read_matrix_field(const nlohmann::json& j, const char* name,
                                    Eigen::Index rows, Eigen::Index cols,
                                    const std::string& what) {
  const nlohmann::json& field = require_field(j, name, what);
  if (!field.is_array() || static_cast<Eigen::Index>(field.size()) != rows)
    throw Error(errc::parse_error, what + ": field \"" + name + "\" must be an array of " +
                                       std::to_string(rows) + " rows");
  RealMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const nlohmann::json& row = field.at(static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw Error(errc::parse_error, what + ": field \"" + name + "\" row " +
                                         std::to_string(r) + " must have " +
                                         std::to_string(cols) + " entries");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const nlohmann::json& cell = row.at(static_cast<std::size_t>(c));
      if (!cell.is_number())
        throw Error(errc::parse_error, what + ": field \"" + name + "\" entry (" +
                                           std::to_string(r) + "," + std::to_string(c) +
                                           ") is not a number");
      m(r, c) = cell.get<double>();
    }
  }
  return m;
}

}  // namespace detail

inline DensityMatrix parse_density(const std::string& text,
                                   double psd_tol = kPsdTolDefault) {
  const std::string what = "density matrix";
  const nlohmann::json j = detail::parse_json_text(text, what);
  const nlohmann::json& ld = detail::require_field(j, "local_dim", what);
  if (!ld.is_number_integer() || ld.get<long long>() < 2)
    throw Error(errc::parse_error, what + ": \"local_dim\" must be an integer >= 2");
  const int d = ld.get<int>();
  const bool bipartite = j.contains("bipartite") ? j.at("bipartite").get<bool>() : true;
  const Eigen::Index n = bipartite ? Eigen::Index(d) * d : Eigen::Index(d);
  const RealMatrix re = detail::read_matrix_field(j, "re", n, n, what);
  const RealMatrix im = detail::read_matrix_field(j, "im", n, n, what);
  ComplexMatrix m(n, n);
  m.real() = re;
  m.imag() = im;
  return validate_density(m, d, bipartite, psd_tol);
}

inline OrthonormalBasis parse_basis(const std::string& text) {
  const std::string what = "measurement basis";
  const nlohmann::json j = detail::parse_json_text(text, what);
  const nlohmann::json& ld = detail::require_field(j, "local_dim", what);
  if (!ld.is_number_integer() || ld.get<long long>() < 2)
    throw Error(errc::parse_error, what + ": \"local_dim\" must be an integer >= 2");
  const int d = ld.get<int>();
  const RealMatrix re = detail::read_matrix_field(j, "vectors_re", d, d, what);
  const RealMatrix im = detail::read_matrix_field(j, "vectors_im", d, d, what);
  ComplexMatrix b(d, d);
  // Rows in the file are vectors; columns in memory are vectors.
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) b(k, i) = std::complex<double>(re(i, k), im(i, k));
  return OrthonormalBasis(std::move(b));
}

// --- analysis reports -------------------------------------------------------

inline std::string to_json(const CorrelationTensorDecomposition& dec) {
  JsonWriter w;
  w.begin_object();
  w.key("alpha");
  detail::write_real_vector(w, dec.alpha);
  w.key("beta");
  detail::write_real_vector(w, dec.beta);
  w.key("T");
  detail::write_real_matrix(w, dec.tensor);
  w.end_object();
  return w.str();
}

inline void write_verdict(JsonWriter& w, const PerfectCorrelationVerdict& v) {
  w.begin_object();
  w.key("perfect").value(v.perfect());
  w.key("permutation").begin_array();
  for (int i = 0; i < v.permutation.d(); ++i) w.value(v.permutation(i));
  w.end_array();
  w.key("signature").value(v.signature.to_string());
  w.key("leakage").value(v.leakage);
  w.end_object();
}

inline std::string to_json(const PerfectCorrelationVerdict& v) {
  JsonWriter w;
  write_verdict(w, v);
  return w.str();
}

inline const char* falsify_status_name(FalsifyStatus s) {
  switch (s) {
    case FalsifyStatus::certified_invariant: return "certified";
    case FalsifyStatus::falsified: return "falsified";
    case FalsifyStatus::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

inline std::string to_json(const FalsificationResult& r) {
  JsonWriter w;
  w.begin_object();
  w.key("verdict").value(falsify_status_name(r.status));
  w.key("defect").value(r.defect);
  w.key("signature_mismatch").value(r.signature_mismatch);
  w.key("witness");
  if (r.witness) {
    const FalsificationWitness& wit = *r.witness;
    w.begin_object();
    w.key("kind").value(witness_kind_name(wit.kind));
    w.key("signature_1").value(wit.verdict_1.signature.to_string());
    w.key("signature_2").value(wit.verdict_2.signature.to_string());
    w.key("leakage_1").value(wit.verdict_1.leakage);
    w.key("leakage_2").value(wit.verdict_2.leakage);
    w.key("shared_vector_index");
    if (wit.shared_vector_index)
      w.value(*wit.shared_vector_index);
    else
      w.null();
    w.key("basis_1");
    write_basis(w, wit.basis_1);
    w.key("basis_2");
    write_basis(w, wit.basis_2);
    w.end_object();
  } else {
    w.null();
  }
  w.key("probes").value(r.probes_used);
  w.key("seed").value(r.seed);
  w.end_object();
  return w.str();
}

inline std::string to_json(const ChannelStats& stats) {
  JsonWriter w;
  w.begin_object();
  w.key("mean").value(stats.mean);
  w.key("std_error").value(stats.std_error);
  w.key("min").value(stats.min);
  w.key("trials").value(stats.trials);
  w.key("seed").value(stats.seed);
  w.end_object();
  return w.str();
}

inline std::string to_csv(const ChannelStats& stats) {
  std::string out = "trial_index,success_probability\n";
  for (std::size_t t = 0; t < stats.per_trial_success.size(); ++t) {
    out += std::to_string(t);
    out += ',';
    out += format_double(stats.per_trial_success[t]);
    out += '\n';
  }
  return out;
}

inline std::string to_json(const ScanReport& r) {
  JsonWriter w;
  w.begin_object();
  w.key("local_dim").value(r.local_dim);
  w.key("count").value(r.count);
  w.key("probes_per_state").value(r.probes_per_state);
  w.key("seed").value(r.seed);
  w.key("min_defect").value(r.min_defect);
  w.key("argmin_index").value(r.argmin_index);
  w.key("signature_mismatch").value(r.argmin_signature_mismatch);
  w.key("near_singlet_count").value(r.near_singlet_count);
  w.key("argmin_state");
  write_density(w, r.argmin_state);
  w.key("refined").value(r.refined);
  if (r.refined) {
    w.key("refined_defect").value(r.refined_defect);
    w.key("refined_state");
    write_density(w, *r.refined_state);
  }
  if (r.local_dim == 2) {
    w.key("snap_fidelity").value(r.snap_fidelity);
    w.key("snap_certified").value(r.snap_certificate && r.snap_certificate->certified);
  }
  w.end_object();
  return w.str();
}

}  // namespace eprlab
