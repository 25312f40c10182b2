var make = Function;
var f = make("a", "return a * 2");
f(3);
