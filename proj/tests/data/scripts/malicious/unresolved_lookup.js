var qwe = document, lastChild = "substr";
qwe = qwe[lastChild];
qwe(0, 1);
