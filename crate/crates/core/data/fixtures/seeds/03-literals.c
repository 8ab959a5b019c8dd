int counter = 123;
int limit = 456;
