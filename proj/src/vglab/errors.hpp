#pragma once
#include <stdexcept>
#include <string>

namespace vglab {

// Error taxonomy used across the library. Every throw site picks the kind that
// callers (CLI, harness) dispatch on: config problems exit 3, degenerate
// statistics taint reports, numeric failures abort the computation.
enum class ErrorKind {
  domain,        // parameter outside an operation's mathematical domain
  singularity,   // evaluation exactly on a non-integrable singular point
  conditioning,  // matrix factorization failed beyond the jitter policy
  spectrum,      // circulant embedding produced disallowed negative eigenvalues
  quadrature,    // quadrature failed to converge to the requested tolerance
  degenerate,    // estimator hit its degeneracy guard on this path
  unsupported,   // operation not available for this covariance kind
  config,        // bad configuration key/value
  io,            // file read/write failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error domain_error(const std::string& msg) { return Error(ErrorKind::domain, msg); }
inline Error singularity_error(const std::string& msg) { return Error(ErrorKind::singularity, msg); }
inline Error conditioning_error(const std::string& msg) { return Error(ErrorKind::conditioning, msg); }
inline Error spectrum_error(const std::string& msg) { return Error(ErrorKind::spectrum, msg); }
inline Error quadrature_error(const std::string& msg) { return Error(ErrorKind::quadrature, msg); }
inline Error degenerate_error(const std::string& msg) { return Error(ErrorKind::degenerate, msg); }
inline Error unsupported_error(const std::string& msg) { return Error(ErrorKind::unsupported, msg); }
inline Error config_error(const std::string& msg) { return Error(ErrorKind::config, msg); }
inline Error io_error(const std::string& msg) { return Error(ErrorKind::io, msg); }

}  // namespace vglab
