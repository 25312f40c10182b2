var codes = [101, 118, 97, 108];
var n = "";
for (var i = 0; i < codes.length; i++)
    n += String.fromCharCode(codes[i]);
this[n]("app.alert(2)");
