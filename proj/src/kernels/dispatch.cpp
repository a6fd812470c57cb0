#include <atomic>
#include <cstdlib>
#include <string_view>

#include "mflow/kernels.hpp"

namespace mflow::kernels {

#if defined(MFLOW_HAVE_AVX2)
const KernelTable& avx2_table_unchecked();
#endif

const KernelTable* avx2_table() {
#if defined(MFLOW_HAVE_AVX2)
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok ? &avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* resolve() {
  const char* env = std::getenv("MFLOW_KERNELS");
  if (env != nullptr && std::string_view(env) == "scalar") return &scalar_table();
  if (const KernelTable* t = avx2_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> s{resolve()};
  return s;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

bool select(std::string_view name) {
  const KernelTable* t = nullptr;
  if (name == "scalar") t = &scalar_table();
  else if (name == "avx2") t = avx2_table();
  if (t == nullptr) return false;
  slot().store(t, std::memory_order_release);
  return true;
}

}  // namespace mflow::kernels
