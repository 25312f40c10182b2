var field = this.getField("name");
var text = field.value;
field.value = text.toUpperCase();
