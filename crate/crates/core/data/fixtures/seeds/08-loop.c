int loop(int n) { int s = 0; while (n) { s += n; n -= 1; } return s; }
