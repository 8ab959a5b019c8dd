const char *greeting = "hello";
char initial = 'h';
