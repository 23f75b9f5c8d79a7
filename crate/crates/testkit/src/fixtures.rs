//! Example programs shared by several test suites.

/// Loop around an unknown system call; safe because `flag` stays 0.
/// The error call is on line 10.
pub const SYSTEM_CALL_LOOP: &str = "int system_call() { return nondet(); }
int main() {
  int x = nondet(); int flag = 0; int ticks = 0; int result;
  while (1) {
    ticks = ticks + 1;
    result = system_call();
    if (result == 0 || ticks > x) { break; }
  }
  if (flag > 0) {
    error();
  }
  return 0;
}
";

/// `a` decides the error, and both branches of the middle `if` lead to it.
/// Without scoping, the second branch needs its own refinement.
pub const TWO_BRANCHES: &str = "int main() {
  int a = 0;
  int b = nondet();
  if (b > 0) {
    b = b - 1;
  } else {
    b = b + 1;
  }
  if (a != 0) {
    error();
  }
  return 0;
}
";

/// A counter bounded by an unknown input; tracking it never stabilizes.
pub const DIVERGING: &str = "int main() {
  int n = nondet();
  int i = 0;
  while (i < n) {
    i = i + 1;
  }
  if (i < 0) {
    error();
  }
  return 0;
}
";

/// Reaches the error exactly when the input is 7.
pub const INPUT_SEVEN: &str = "int main() {
  int x = nondet();
  if (x == 7) {
    error();
  }
  return 0;
}
";

/// Unconditional error call.
pub const TRIVIALLY_UNSAFE: &str = "int main() {
  error();
}
";
