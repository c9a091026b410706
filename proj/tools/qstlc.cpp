// Placeholder until the library is complete; the real CLI lands with modelio.
#include <cstdio>

int main() {
  std::puts("qstlc: not yet wired");
  return 2;
}
