#include <cstdlib>
#include <stdexcept>
#include <string>

#include "specmap/kernels.hpp"

namespace specmap::kernels {
namespace {

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(SPECMAP_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(SPECMAP_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa select_isa() {
  if (const char* forced = std::getenv("SPECMAP_ISA")) {
    const std::string name(forced);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (name == isa_name(isa) && cpu_supports(isa)) return isa;
    }
  }
  if (cpu_supports(Isa::avx2)) return Isa::avx2;
  if (cpu_supports(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) { return cpu_supports(isa); }

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
    if (cpu_supports(isa)) out.push_back(isa);
  }
  return out;
}

const KernelTable& table(Isa isa) {
  if (!cpu_supports(isa)) {
    throw std::invalid_argument("kernel variant not available: " + std::string(isa_name(isa)));
  }
  switch (isa) {
#if defined(SPECMAP_HAVE_AVX2)
    case Isa::avx2: return detail::avx2_table;
#endif
#if defined(SPECMAP_HAVE_NEON)
    case Isa::neon: return detail::neon_table;
#endif
    default: return detail::scalar_table;
  }
}

Isa active_isa() {
  static const Isa isa = select_isa();
  return isa;
}

const KernelTable& active() {
  static const KernelTable& t = table(active_isa());
  return t;
}

}  // namespace specmap::kernels
