#include "q3/error.hpp"

namespace q3 {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Parameter: return "parameter error";
        case ErrorKind::Data: return "data error";
        case ErrorKind::Capacity: return "capacity error";
        case ErrorKind::Configuration: return "configuration error";
        case ErrorKind::Normalization: return "normalization error";
        case ErrorKind::Budget: return "budget error";
        case ErrorKind::Signal: return "signal error";
        case ErrorKind::Domain: return "domain error";
        case ErrorKind::Fit: return "fit error";
        case ErrorKind::Io: return "io error";
    }
    return "error";
}

}  // namespace q3
