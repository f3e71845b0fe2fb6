#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstring>
#include <string>
#include <vector>

#include "test_util.hpp"

std::string g_copim_binary;

int main(int argc, char** argv) {
  // Pull out our own --copim-bin=... flag before doctest sees the args.
  std::vector<char*> passed;
  for (int i = 0; i < argc; ++i) {
    if (std::strncmp(argv[i], "--copim-bin=", 12) == 0)
      g_copim_binary = argv[i] + 12;
    else
      passed.push_back(argv[i]);
  }
  doctest::Context context(static_cast<int>(passed.size()), passed.data());
  return context.run();
}
